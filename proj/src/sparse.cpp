#include "affpr/sparse.hpp"

#include "affpr/linalg.hpp"
#include "affpr/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace affpr {

namespace {

std::vector<std::vector<Eigen::Index>> subsets_up_to(Eigen::Index d, Eigen::Index s) {
  std::vector<std::vector<Eigen::Index>> out;
  for (Eigen::Index k = 0; k <= s; ++k) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      out.push_back(idx);
      Eigen::Index i = k - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == d - k + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

double binomial(Eigen::Index n, Eigen::Index k) {
  double r = 1.0;
  for (Eigen::Index i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

void require_sparsity(const MeasurementEnsemble& e, Eigen::Index s) {
  if (s < 1 || s > e.d() - 1) {
    throw DomainError("bad_sparsity", "sparsity must satisfy 1 <= s <= d - 1 (got s = " + std::to_string(s) +
                                          ", d = " + std::to_string(e.d()) + ")");
  }
}

/// Real-coordinate embedding of a support: (n_real x width) selector.
Eigen::MatrixXd embedding(ScalarField field, Eigen::Index d, const std::vector<Eigen::Index>& support) {
  const auto k = static_cast<Eigen::Index>(support.size());
  if (field == ScalarField::Real) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d, k);
    for (Eigen::Index c = 0; c < k; ++c) p(support[static_cast<std::size_t>(c)], c) = 1.0;
    return p;
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2 * d, 2 * k);
  for (Eigen::Index c = 0; c < k; ++c) {
    p(support[static_cast<std::size_t>(c)], c) = 1.0;
    p(d + support[static_cast<std::size_t>(c)], k + c) = 1.0;
  }
  return p;
}

}  // namespace

double sparse_work_estimate(Eigen::Index m, Eigen::Index d, Eigen::Index s) {
  double subsets = 0.0;
  for (Eigen::Index k = 0; k <= s; ++k) subsets += binomial(d, k);
  const double pairs = subsets * (subsets + 1.0) / 2.0 - 1.0;
  const double per_solve = static_cast<double>(m) * static_cast<double>(2 * s) * static_cast<double>(2 * s);
  return pairs * std::ldexp(1.0, static_cast<int>(m)) * per_solve;
}

std::vector<SupportPair> support_pairs(Eigen::Index d, Eigen::Index s) {
  const auto subs = subsets_up_to(d, s);
  std::vector<SupportPair> out;
  for (std::size_t a = 0; a < subs.size(); ++a) {
    for (std::size_t b = a; b < subs.size(); ++b) {
      if (subs[a].empty() && subs[b].empty()) continue;
      out.push_back({subs[a], subs[b]});
    }
  }
  return out;
}

SparseVerdict certify_sparse_real_exact(const MeasurementEnsemble& e, Eigen::Index s, const RankTolerance& tol,
                                        const SparseCertifyOptions& opts) {
  require_valid(e);
  if (e.field != ScalarField::Real) throw DomainError("field_mismatch", "certify_sparse_real_exact requires a real ensemble");
  require_sparsity(e, s);
  if (e.m() > opts.enumeration_cap) {
    throw DomainError("enumeration_cap", "m = " + std::to_string(e.m()) + " exceeds the enumeration cap");
  }
  const double work = sparse_work_estimate(e.m(), e.d(), s);
  if (work > opts.work_budget) {
    throw DomainError("budget_exceeded", "estimated work " + std::to_string(work) + " exceeds the budget of " +
                                             std::to_string(opts.work_budget) + " scalar operations");
  }
  const Eigen::Index m = e.m(), d = e.d();
  const Eigen::MatrixXd a = e.real_rows();
  const Eigen::VectorXd b = e.real_shifts();
  Eigen::MatrixXd lifted(m, d + 1);
  lifted << a, b;
  const double thr = tol.absolute(spectral_norm(lifted), m, d + 1);

  SparseVerdict verdict;
  for (const SupportPair& pair : support_pairs(d, s)) {
    const Eigen::MatrixXd pi = embedding(ScalarField::Real, d, pair.first);
    const Eigen::MatrixXd pj = embedding(ScalarField::Real, d, pair.second);
    const Eigen::Index ni = pi.cols(), nj = pj.cols();
    const Eigen::MatrixXd ai = a * pi;
    const Eigen::MatrixXd aj = a * pj;
    // x - y as a linear function of z = (x_I, y_J).
    Eigen::MatrixXd diff(d, ni + nj);
    diff << pi, -pj;

    for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
      ++verdict.stats.subsets_checked;
      Eigen::MatrixXd sys(m, ni + nj);
      Eigen::VectorXd rhs(m);
      for (Eigen::Index j = 0; j < m; ++j) {
        if (mask & (1ull << j)) {
          sys.row(j) << ai.row(j), -aj.row(j);
          rhs(j) = 0.0;
        } else {
          sys.row(j) << ai.row(j), aj.row(j);
          rhs(j) = -2.0 * b(j);
        }
      }
      Eigen::MatrixXd aug(m, ni + nj + 1);
      aug << sys, rhs;
      if (numerical_rank(aug, thr) != numerical_rank(sys, thr)) continue;
      const Eigen::VectorXd z0 = min_norm_solve(sys, rhs);
      const Eigen::MatrixXd null = null_space(sys, thr);

      std::optional<Eigen::VectorXd> z;
      const double sep_tol = 1e-8 * (1.0 + z0.norm());
      if ((diff * z0).norm() > sep_tol) {
        z = z0;
      } else {
        for (Eigen::Index c = 0; c < null.cols(); ++c) {
          const double dn = (diff * null.col(c)).norm();
          if (dn > 1e-8) {
            z = Eigen::VectorXd(z0 + null.col(c) / dn);
            break;
          }
        }
      }
      if (!z) continue;
      WitnessPair w{Signal::real(pi * z->head(ni)), Signal::real(pj * z->tail(nj))};
      if (!check_witness(e, w).ok) {
        verdict.stats.note = "unverified candidate skipped";
        continue;
      }
      verdict.outcome = Outcome::NotRetrievable;
      verdict.failing_pair = pair;
      verdict.witness = w;
      for (Eigen::Index j = 0; j < m; ++j)
        if (mask & (1ull << j)) verdict.failing_subset.push_back(j);
      return verdict;
    }
  }
  verdict.outcome = Outcome::Retrievable;
  return verdict;
}

SparseVerdict falsify_sparse_complex(const MeasurementEnsemble& e, Eigen::Index s, const FalsifyConfig& cfg) {
  if (e.field != ScalarField::Complex) throw DomainError("field_mismatch", "falsify_sparse_complex requires a complex ensemble");
  if (!all_finite(e)) throw DomainError("non_finite", "ensemble has non-finite entries");
  require_valid(e);
  require_sparsity(e, s);
  const Eigen::Index d = e.d();
  const detail::RealForms f = detail::real_forms(e);
  const double threshold = cfg.residual_relative * e.energy_scale();

  SparseVerdict verdict;
  verdict.stats.best_residual = std::numeric_limits<double>::infinity();
  std::uint64_t pair_index = 0;
  for (const SupportPair& pair : support_pairs(d, s)) {
    const Eigen::MatrixXd pi = embedding(ScalarField::Complex, d, pair.first);
    const Eigen::MatrixXd pj = embedding(ScalarField::Complex, d, pair.second);
    const Eigen::Index k = pi.cols() + pj.cols();
    // theta = (x_I, y_J) in real coordinates; u = (x - y) / 2, v = (x + y) / 2.
    Eigen::MatrixXd px(2 * d, k), py(2 * d, k);
    px << pi, Eigen::MatrixXd::Zero(2 * d, pj.cols());
    py << Eigen::MatrixXd::Zero(2 * d, pi.cols()), pj;
    const Eigen::MatrixXd pu = (px - py) / 2.0;
    const Eigen::MatrixXd pv = (px + py) / 2.0;

    for (int restart = 0; restart < cfg.restarts; ++restart) {
      GaussianStream rng(derive_seed(cfg.seed, {pair_index, static_cast<std::uint64_t>(restart)}));
      Eigen::VectorXd theta = rng.normal_vector(k);
      const double un = (pu * theta).norm();
      if (un == 0.0) continue;
      theta /= un;
      const auto pol = detail::polish_uv(f, pu, pv, theta, 1.0, std::max(60, cfg.iterations / 5));
      ++verdict.stats.restarts_tried;
      const double fval = pol.residual * pol.residual;
      verdict.stats.best_residual = std::min(verdict.stats.best_residual, fval);
      if (fval >= threshold) continue;
      WitnessPair w{from_real_coords(ScalarField::Complex, px * pol.theta),
                    from_real_coords(ScalarField::Complex, py * pol.theta)};
      if (!check_witness(e, w).ok) continue;
      verdict.outcome = Outcome::NotRetrievable;
      verdict.failing_pair = pair;
      verdict.witness = w;
      return verdict;
    }
    ++pair_index;
  }
  verdict.outcome = Outcome::Inconclusive;
  verdict.stats.note = "no witness found";
  return verdict;
}

Signal sample_sparse_signal(Eigen::Index d, Eigen::Index s, ScalarField field, std::uint64_t seed) {
  if (d < 1 || s < 0 || s > d) throw DomainError("bad_sparsity", "sparsity must satisfy 0 <= s <= d");
  GaussianStream rng(derive_seed(seed, {0x7370617273ull}));
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(d - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(d);
  for (Eigen::Index i = 0; i < s; ++i) {
    x(perm[static_cast<std::size_t>(i)]) = field == ScalarField::Real ? cdouble(rng.normal()) : rng.complex_normal();
  }
  return {field, x};
}

}  // namespace affpr
