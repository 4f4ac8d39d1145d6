#include "affpr/stability.hpp"

#include "affpr/random.hpp"

#include <cmath>

namespace affpr {

PairRatios pair_ratios(const MeasurementEnsemble& e, const Signal& x, const Signal& y) {
  const double dist = (x.entries - y.entries).norm();
  if (!(dist > 0.0)) throw DomainError("degenerate_pair", "pair ratios need x != y");
  const double weight = 1.0 + x.norm() + y.norm();
  const double n1 = (measure(e, x).values - measure(e, y).values).norm();
  const double n2 = (measure_sq(e, x) - measure_sq(e, y)).norm();
  return {n1 * weight / dist, n1 / dist, n2 / dist, n2 / (weight * dist)};
}

Signal sample_ball(ScalarField field, Eigen::Index d, double radius, std::uint64_t seed) {
  GaussianStream rng(seed);
  const Eigen::Index n = real_dim(field, d);
  Eigen::VectorXd dir = rng.normal_vector(n);
  while (dir.norm() == 0.0) dir = rng.normal_vector(n);
  const double rho = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
  return from_real_coords(field, dir.normalized() * rho);
}

LipschitzEstimate estimate_lipschitz(const MeasurementEnsemble& e, double radius, std::int64_t n,
                                     std::uint64_t seed, const std::vector<WitnessPair>& extra,
                                     std::vector<PairRatios>* all_ratios) {
  require_valid(e);
  if (!all_finite(e)) throw DomainError("non_finite", "ensemble has non-finite entries");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("bad_radius", "radius must be positive");
  if (n < 2) throw DomainError("bad_sample_count", "need at least two sample pairs");
  for (const auto& w : extra) {
    require_compatible(e, w.x);
    require_compatible(e, w.y);
  }

  LipschitzEstimate est;
  est.samples = n + static_cast<std::int64_t>(extra.size());
  est.radius = radius;
  est.seed = seed;
  bool first = true;
  auto consider = [&](std::int64_t index, const Signal& x, const Signal& y) {
    const PairRatios r = pair_ratios(e, x, y);
    if (all_ratios) all_ratios->push_back(r);
    auto update = [&](AttainingPair& slot, double& value, double candidate, bool minimize) {
      if (first || (minimize ? candidate < value : candidate > value)) {
        value = candidate;
        slot = {{x, y}, candidate, index};
      }
    };
    update(est.c1_pair, est.c1_hat, r.r1_lower, true);
    update(est.C1_pair, est.C1_hat, r.r1_upper, false);
    update(est.c2_pair, est.c2_hat, r.r2_lower, true);
    update(est.C2_pair, est.C2_hat, r.r2_upper, false);
    first = false;
  };

  const ScalarField field = e.field;
  const Eigen::Index d = e.d();
  for (std::int64_t i = 0; i < n; ++i) {
    const std::uint64_t base = derive_seed(seed, {static_cast<std::uint64_t>(i)});
    Signal x = sample_ball(field, d, radius, derive_seed(base, {0}));
    Signal y = sample_ball(field, d, radius, derive_seed(base, {1}));
    // A coincident draw has probability zero; redraw deterministically anyway.
    for (std::uint64_t k = 2; x.entries == y.entries; ++k) y = sample_ball(field, d, radius, derive_seed(base, {k}));
    consider(i, x, y);
  }
  for (std::size_t k = 0; k < extra.size(); ++k) consider(n + static_cast<std::int64_t>(k), extra[k].x, extra[k].y);
  return est;
}

double anisotropy_ratio(const MeasurementEnsemble& e, const Signal& x0, double r) {
  require_valid(e);
  require_compatible(e, x0);
  if (!(x0.norm() > 0.0)) throw DomainError("zero_signal", "x0 must be nonzero");
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("bad_radius", "r must be positive");
  const Signal plus(x0.field, r * x0.entries);
  const Signal minus(x0.field, -r * x0.entries);
  return (measure(e, plus).values - measure(e, minus).values).norm() / (2.0 * r * x0.norm());
}

}  // namespace affpr
