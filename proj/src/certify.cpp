#include "affpr/certify.hpp"

#include "affpr/random.hpp"
#include "exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace affpr {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Retrievable: return "retrievable";
    case Outcome::NotRetrievable: return "not_retrievable";
    case Outcome::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string to_string(Certificate c) {
  switch (c) {
    case Certificate::ExactSubsetCheck: return "exact_subset_check";
    case Certificate::StructuredConstruction: return "structured_construction";
    case Certificate::None: return "none";
  }
  return "none";
}

UVWitness to_uv(const WitnessPair& w) {
  return {Signal(w.x.field, (w.x.entries - w.y.entries) / 2.0),
          Signal(w.x.field, (w.x.entries + w.y.entries) / 2.0)};
}

WitnessPair to_pair(const UVWitness& uv) {
  return {Signal(uv.u.field, uv.v.entries + uv.u.entries),
          Signal(uv.u.field, uv.v.entries - uv.u.entries)};
}

WitnessCheck check_witness(const MeasurementEnsemble& e, const WitnessPair& w,
                           const WitnessTolerance& tol) {
  WitnessCheck c;
  const Eigen::VectorXd mx = measure(e, w.x).values;
  const Eigen::VectorXd my = measure(e, w.y).values;
  c.mismatch = (mx - my).cwiseAbs().maxCoeff();
  c.allowed = tol.relative_mismatch * (1.0 + mx.cwiseAbs().maxCoeff());
  c.separation = (w.x.entries - w.y.entries).norm();
  c.ok = std::isfinite(c.mismatch) && c.mismatch <= c.allowed && c.separation >= tol.min_separation;
  return c;
}

namespace {

/// Combinations of {0..m-1} by increasing size, lexicographic within a size.
template <typename Visit>
bool for_each_subset(int m, Visit&& visit) {
  std::vector<int> idx;
  for (int k = 0; k <= m; ++k) {
    idx.resize(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      if (visit(idx)) return true;
      int i = k - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - k + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return false;
}

std::vector<Eigen::Index> complement(const std::vector<int>& s, int m) {
  std::vector<Eigen::Index> out;
  std::size_t p = 0;
  for (int j = 0; j < m; ++j) {
    if (p < s.size() && s[p] == j) {
      ++p;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

std::vector<Eigen::Index> as_index(const std::vector<int>& s) {
  return {s.begin(), s.end()};
}

Eigen::VectorXd select(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = v(idx[k]);
  return out;
}

/// Rank oracle for the real certifier: floating point with a shared threshold,
/// or exact rationals.
class RealRankOracle {
 public:
  RealRankOracle(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const RankTolerance& tol,
                 bool exact)
      : a_(a), b_(b), exact_(exact) {
    Eigen::MatrixXd lifted(a.rows(), a.cols() + 1);
    lifted << a, b;
    threshold_ = tol.absolute(spectral_norm(lifted), a.rows(), a.cols() + 1);
    if (exact_) {
      ra_ = exact::to_rational(a);
      rb_.reserve(static_cast<std::size_t>(b.size()));
      for (Eigen::Index i = 0; i < b.size(); ++i) rb_.push_back(exact::to_rational(b(i)));
    }
  }

  Eigen::Index rows_rank(const std::vector<Eigen::Index>& idx) const {
    if (idx.empty()) return 0;
    if (exact_) return static_cast<Eigen::Index>(exact::rank(rows(idx, false)));
    return numerical_rank(select_rows(a_, idx), threshold_);
  }

  bool shift_in_span(const std::vector<Eigen::Index>& idx) const {
    if (idx.empty()) return true;
    if (exact_) return exact::rank(rows(idx, true)) == exact::rank(rows(idx, false));
    Eigen::MatrixXd aug(static_cast<Eigen::Index>(idx.size()), a_.cols() + 1);
    aug << select_rows(a_, idx), select(b_, idx);
    return numerical_rank(aug, threshold_) == numerical_rank(select_rows(a_, idx), threshold_);
  }

  /// v with A_S v = -b_S.
  Eigen::VectorXd solve_shift(const std::vector<Eigen::Index>& idx) const {
    const Eigen::Index d = a_.cols();
    if (idx.empty()) return Eigen::VectorXd::Zero(d);
    if (exact_) {
      exact::RVector rhs;
      for (auto j : idx) rhs.push_back(-rb_[static_cast<std::size_t>(j)]);
      auto sol = exact::solve(rows(idx, false), rhs, static_cast<std::size_t>(d));
      if (sol) return to_double(*sol);
    }
    return min_norm_solve(select_rows(a_, idx), Eigen::VectorXd(-select(b_, idx)));
  }

  /// Unit u orthogonal to the rows in idx.
  Eigen::VectorXd orthogonal(const std::vector<Eigen::Index>& idx) const {
    const Eigen::Index d = a_.cols();
    Eigen::VectorXd u;
    if (exact_) {
      auto nv = exact::null_vector(rows(idx, false), static_cast<std::size_t>(d));
      if (nv) u = to_double(*nv);
    }
    if (u.size() == 0) u = least_singular_vector(select_rows(a_, idx));
    return u / u.norm();
  }

 private:
  exact::RMatrix rows(const std::vector<Eigen::Index>& idx, bool with_shift) const {
    exact::RMatrix out;
    for (auto j : idx) {
      auto r = ra_[static_cast<std::size_t>(j)];
      if (with_shift) r.push_back(rb_[static_cast<std::size_t>(j)]);
      out.push_back(std::move(r));
    }
    return out;
  }

  static Eigen::VectorXd to_double(const exact::RVector& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = exact::to_double(v[i]);
    return out;
  }

  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  bool exact_;
  double threshold_ = 0.0;
  exact::RMatrix ra_;
  exact::RVector rb_;
};

}  // namespace

Verdict certify_real_exact(const MeasurementEnsemble& e, const RankTolerance& tol,
                           const CertifyOptions& opts) {
  require_valid(e);
  if (e.field != ScalarField::Real) {
    throw DomainError("field_mismatch", "certify_real_exact requires a real ensemble");
  }
  if (tol.relative <= 0.0) throw DomainError("bad_tolerance", "rank tolerance must be positive");
  if (e.m() > opts.enumeration_cap) {
    throw DomainError("enumeration_cap", "m = " + std::to_string(e.m()) + " exceeds the enumeration cap of " +
                                             std::to_string(opts.enumeration_cap) +
                                             "; use the falsifier or the collision search instead");
  }
  const int m = static_cast<int>(e.m());
  const Eigen::Index d = e.d();
  const RealRankOracle oracle(e.real_rows(), e.real_shifts(), tol, opts.exact_rational);

  Verdict verdict;
  bool saw_unverified = false;
  const bool found = for_each_subset(m, [&](const std::vector<int>& s) {
    ++verdict.stats.subsets_checked;
    const auto sc = complement(s, m);
    if (oracle.rows_rank(sc) >= d) return false;
    const auto si = as_index(s);
    if (!oracle.shift_in_span(si)) return false;

    if (opts.check_subset_lemma) {
      for (std::size_t drop = 0; drop < si.size(); ++drop) {
        auto sub = si;
        sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(drop));
        if (!oracle.shift_in_span(sub)) {
          throw std::logic_error("subset lemma violated during enumeration");
        }
      }
    }

    const Eigen::VectorXd v = oracle.solve_shift(si);
    const Eigen::VectorXd u = oracle.orthogonal(sc);
    UVWitness uv{Signal::real(u), Signal::real(v)};
    WitnessPair w = to_pair(uv);
    if (!check_witness(e, w).ok) {
      saw_unverified = true;
      return false;
    }
    verdict.outcome = Outcome::NotRetrievable;
    verdict.witness = w;
    verdict.uv = uv;
    verdict.failing_subset = si;
    return true;
  });

  if (found) return verdict;
  if (saw_unverified) {
    throw DomainError("borderline_rank",
                      "a failing subset was detected but its witness does not verify; the rank "
                      "decision is borderline at this tolerance (try exact mode or another --tol)");
  }
  verdict.outcome = Outcome::Retrievable;
  verdict.certificate = Certificate::ExactSubsetCheck;
  return verdict;
}

Eigen::VectorXd violates_condition_c(const MeasurementEnsemble& e, const Signal& u, const Signal& v) {
  require_compatible(e, u);
  require_compatible(e, v);
  const Eigen::VectorXcd p = e.rows * u.entries;
  const Eigen::VectorXcd q = affine_values(e, v.entries);
  Eigen::VectorXd out(e.m());
  for (Eigen::Index k = 0; k < e.m(); ++k) out(k) = (std::conj(p(k)) * q(k)).real();
  return out;
}

Eigen::MatrixXd jacobian(const MeasurementEnsemble& e, const Signal& x) {
  require_compatible(e, x);
  const Eigen::VectorXcd z = affine_values(e, x.entries);
  const Eigen::Index m = e.m(), d = e.d();
  if (e.field == ScalarField::Real) {
    Eigen::MatrixXd j(d, m);
    for (Eigen::Index k = 0; k < m; ++k) j.col(k) = z(k).real() * e.rows.row(k).real().transpose();
    return j;
  }
  // alpha_k = Re z_k, beta_k = Im z_k.
  Eigen::MatrixXd j(m, 2 * d);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double alpha = z(k).real();
    const double beta = z(k).imag();
    const Eigen::RowVectorXd rr = e.rows.row(k).real();
    const Eigen::RowVectorXd ri = e.rows.row(k).imag();
    j.row(k).head(d) = 2.0 * (alpha * rr + beta * ri);
    j.row(k).tail(d) = 2.0 * (beta * rr - alpha * ri);
  }
  return j;
}

Eigen::MatrixXd measure_sq_jacobian(const MeasurementEnsemble& e, const Signal& x) {
  Eigen::MatrixXd j = jacobian(e, x);
  if (e.field == ScalarField::Real) return 2.0 * j.transpose();
  return j;
}

Eigen::Index jacobian_rank_deficit(const MeasurementEnsemble& e, const Signal& x,
                                   const RankTolerance& tol) {
  const Eigen::MatrixXd j = jacobian(e, x);
  const Eigen::Index target = real_dim(e.field, e.d());
  return target - relative_rank(j, tol);
}

namespace detail {

RealForms real_forms(const MeasurementEnsemble& e) {
  RealForms f;
  f.m = e.m();
  const Eigen::Index d = e.d();
  if (e.field == ScalarField::Real) {
    f.width = 1;
    f.n = d;
    f.forms = e.real_rows();
    f.offsets = e.real_shifts();
    return f;
  }
  f.width = 2;
  f.n = 2 * d;
  f.forms.resize(2 * f.m, 2 * d);
  f.offsets.resize(2 * f.m);
  for (Eigen::Index k = 0; k < f.m; ++k) {
    const Eigen::RowVectorXd rr = e.rows.row(k).real();
    const Eigen::RowVectorXd ri = e.rows.row(k).imag();
    f.forms.row(2 * k) << rr, -ri;
    f.forms.row(2 * k + 1) << ri, rr;
    f.offsets(2 * k) = e.shifts(k).real();
    f.offsets(2 * k + 1) = e.shifts(k).imag();
  }
  return f;
}

Eigen::VectorXd uv_residuals(const RealForms& f, const Eigen::VectorXd& ut, const Eigen::VectorXd& vt) {
  const Eigen::VectorXd p = f.forms * ut;
  const Eigen::VectorXd q = f.forms * vt + f.offsets;
  Eigen::VectorXd rho(f.m);
  for (Eigen::Index k = 0; k < f.m; ++k) {
    rho(k) = p.segment(k * f.width, f.width).dot(q.segment(k * f.width, f.width));
  }
  return rho;
}

namespace {

Eigen::VectorXd polish_residual(const RealForms& f, const Eigen::MatrixXd& pu, const Eigen::MatrixXd& pv,
                                const Eigen::VectorXd& theta, double u_norm) {
  const Eigen::VectorXd ut = pu * theta;
  Eigen::VectorXd r(f.m + 1);
  r.head(f.m) = uv_residuals(f, ut, pv * theta);
  r(f.m) = 0.5 * (ut.squaredNorm() - u_norm * u_norm);
  return r;
}

}  // namespace

PolishResult polish_uv(const RealForms& f, const Eigen::MatrixXd& pu, const Eigen::MatrixXd& pv,
                       Eigen::VectorXd theta, double u_norm, int iterations) {
  const Eigen::MatrixXd lu = f.forms * pu;
  const Eigen::MatrixXd lv = f.forms * pv;
  Eigen::VectorXd r = polish_residual(f, pu, pv, theta, u_norm);
  double cost = r.norm();
  for (int it = 0; it < iterations && cost > 0.0; ++it) {
    const Eigen::VectorXd p = lu * theta;
    const Eigen::VectorXd q = lv * theta + f.offsets;
    Eigen::MatrixXd jac(f.m + 1, theta.size());
    for (Eigen::Index k = 0; k < f.m; ++k) {
      const auto seg = Eigen::seqN(k * f.width, f.width);
      jac.row(k) = q(seg).transpose() * lu(seg, Eigen::all) + p(seg).transpose() * lv(seg, Eigen::all);
    }
    jac.row(f.m) = (pu * theta).transpose() * pu;
    const Eigen::VectorXd step = min_norm_solve(jac, Eigen::VectorXd(-r));
    double scale = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Eigen::VectorXd cand = theta + scale * step;
      const Eigen::VectorXd rc = polish_residual(f, pu, pv, cand, u_norm);
      const double cc = rc.norm();
      if (std::isfinite(cc) && cc < cost) {
        theta = cand;
        r = rc;
        cost = cc;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;
  }
  return {theta, uv_residuals(f, pu * theta, pv * theta).norm()};
}

}  // namespace detail

Verdict falsify_complex(const MeasurementEnsemble& e, const FalsifyConfig& cfg) {
  if (e.field != ScalarField::Complex) {
    throw DomainError("field_mismatch", "falsify_complex requires a complex ensemble");
  }
  if (!all_finite(e)) throw DomainError("non_finite", "ensemble has non-finite entries");
  require_valid(e);

  const detail::RealForms f = detail::real_forms(e);
  const Eigen::Index n = f.n;
  const double threshold = cfg.residual_relative * e.energy_scale();
  const Eigen::MatrixXd pu = (Eigen::MatrixXd(n, 2 * n) << Eigen::MatrixXd::Identity(n, n),
                              Eigen::MatrixXd::Zero(n, n)).finished();
  const Eigen::MatrixXd pv = (Eigen::MatrixXd(n, 2 * n) << Eigen::MatrixXd::Zero(n, n),
                              Eigen::MatrixXd::Identity(n, n)).finished();

  Verdict verdict;
  verdict.stats.best_residual = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    GaussianStream rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(restart)}));
    Eigen::VectorXd u;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    if (restart == 0) {
      u = Eigen::VectorXd::Unit(n, 0);
    } else {
      u = rng.normal_vector(n).normalized();
    }
    double fval = std::numeric_limits<double>::infinity();
    double prev = fval;
    int stalled = 0;
    for (int it = 0; it < cfg.iterations; ++it) {
      // v-step: rho_k is affine in v with u fixed.
      const Eigen::VectorXd p = f.forms * u;
      Eigen::MatrixXd g(f.m, n);
      Eigen::VectorXd c(f.m);
      for (Eigen::Index k = 0; k < f.m; ++k) {
        const auto seg = Eigen::seqN(k * f.width, f.width);
        g.row(k) = p(seg).transpose() * f.forms(seg, Eigen::all);
        c(k) = p(seg).dot(f.offsets(seg));
      }
      v = min_norm_solve(g, Eigen::VectorXd(-c));
      // u-step: rho_k is linear in u with v fixed; minimise over the sphere.
      const Eigen::VectorXd q = f.forms * v + f.offsets;
      Eigen::MatrixXd h(f.m, n);
      for (Eigen::Index k = 0; k < f.m; ++k) {
        const auto seg = Eigen::seqN(k * f.width, f.width);
        h.row(k) = q(seg).transpose() * f.forms(seg, Eigen::all);
      }
      u = least_singular_vector(h);
      u.normalize();
      fval = (h * u).squaredNorm();
      if (fval < threshold) break;
      if (prev - fval <= 1e-12 * prev) {
        if (++stalled >= 10) break;
      } else {
        stalled = 0;
      }
      prev = fval;
    }
    verdict.stats.restarts_tried = restart + 1;
    verdict.stats.best_residual = std::min(verdict.stats.best_residual, fval);
    if (fval >= threshold) continue;

    Eigen::VectorXd theta(2 * n);
    theta << u, v;
    const auto polished = detail::polish_uv(f, pu, pv, theta, 1.0);
    Eigen::VectorXd up = pu * polished.theta;
    up.normalize();
    const Eigen::VectorXd vp = pv * polished.theta;
    UVWitness uv{from_real_coords(ScalarField::Complex, up), from_real_coords(ScalarField::Complex, vp)};
    WitnessPair w = to_pair(uv);
    if (!check_witness(e, w).ok) continue;
    verdict.outcome = Outcome::NotRetrievable;
    verdict.witness = w;
    verdict.uv = uv;
    verdict.stats.best_residual = std::min(verdict.stats.best_residual,
                                           violates_condition_c(e, uv.u, uv.v).squaredNorm());
    return verdict;
  }
  verdict.outcome = Outcome::Inconclusive;
  verdict.stats.note = "no witness found";
  return verdict;
}

double collinearity_margin(cdouble b1, cdouble b2, cdouble b3) {
  return std::abs((std::conj(b2 - b1) * (b3 - b1)).imag());
}

std::optional<StructuredPattern> detect_stacked_blocks(const MeasurementEnsemble& e, int copies) {
  const Eigen::Index d = e.d();
  if (e.m() != copies * d) return std::nullopt;
  const Eigen::MatrixXcd block = e.rows.topRows(d);
  const double scale = std::max(1.0, e.rows.cwiseAbs().maxCoeff());
  for (int c = 1; c < copies; ++c) {
    const double diff = (e.rows.middleRows(c * d, d) - block).cwiseAbs().maxCoeff();
    if (diff > 1e-14 * scale) return std::nullopt;
  }
  return StructuredPattern{block, copies};
}

Verdict certify_structured(const MeasurementEnsemble& e, const RankTolerance& tol) {
  Verdict v;
  v.outcome = Outcome::Inconclusive;
  v.stats.note = "pattern not matched";
  if (!validate_ensemble(e).empty()) return v;
  const Eigen::Index d = e.d();
  const int copies = e.field == ScalarField::Real ? 2 : 3;
  const auto pattern = detect_stacked_blocks(e, copies);
  if (!pattern) return v;
  if (relative_rank(pattern->block, tol) < d) {
    v.stats.note = "pattern not matched: block is singular";
    return v;
  }
  const double bscale = 1.0 + e.shifts.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (copies == 2) {
      if (std::abs(e.shifts(j) - e.shifts(d + j)) <= tol.relative * bscale) {
        v.stats.note = "pattern not matched: equal shift pair at coordinate " + std::to_string(j);
        return v;
      }
    } else {
      const double margin = collinearity_margin(e.shifts(j), e.shifts(d + j), e.shifts(2 * d + j));
      if (margin <= tol.relative * bscale * bscale) {
        v.stats.note = "pattern not matched: collinear shift triple at coordinate " + std::to_string(j);
        return v;
      }
    }
  }
  v.outcome = Outcome::Retrievable;
  v.certificate = Certificate::StructuredConstruction;
  v.stats.note.clear();
  return v;
}

std::optional<WitnessPair> brute_force_collision_search(const MeasurementEnsemble& e,
                                                        const CollisionSearchConfig& cfg) {
  require_valid(e);
  const detail::RealForms f = detail::real_forms(e);
  const Eigen::Index n = f.n;
  const Eigen::MatrixXd pu = (Eigen::MatrixXd(n, 2 * n) << Eigen::MatrixXd::Identity(n, n),
                              Eigen::MatrixXd::Zero(n, n)).finished();
  const Eigen::MatrixXd pv = (Eigen::MatrixXd(n, 2 * n) << Eigen::MatrixXd::Zero(n, n),
                              Eigen::MatrixXd::Identity(n, n)).finished();

  auto refine = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) -> std::optional<WitnessPair> {
    WitnessPair raw{from_real_coords(e.field, x), from_real_coords(e.field, y)};
    if (check_witness(e, raw).ok) return raw;
    Eigen::VectorXd theta(2 * n);
    theta << (x - y) / 2.0, (x + y) / 2.0;
    const double un = theta.head(n).norm();
    if (un == 0.0) return std::nullopt;
    const auto pol = detail::polish_uv(f, pu, pv, theta, un);
    const Eigen::VectorXd u = pu * pol.theta;
    const Eigen::VectorXd v = pv * pol.theta;
    WitnessPair w{from_real_coords(e.field, v + u), from_real_coords(e.field, v - u)};
    if (check_witness(e, w).ok) return w;
    return std::nullopt;
  };

  auto msq = [&](const Eigen::VectorXd& coords) {
    return measure_sq(e, from_real_coords(e.field, coords));
  };

  if (cfg.mode == CollisionSearchConfig::Mode::Random) {
    GaussianStream rng(derive_seed(cfg.seed, {0x72616e64ull}));
    auto ball = [&]() {
      Eigen::VectorXd dir = rng.normal_vector(n);
      dir.normalize();
      return Eigen::VectorXd(dir * cfg.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n)));
    };
    for (int s = 0; s < cfg.samples; ++s) {
      const Eigen::VectorXd x = ball();
      const Eigen::VectorXd y = ball();
      if (auto w = refine(x, y)) return w;
    }
    return std::nullopt;
  }

  if (n > 4) throw DomainError("grid_dimension", "grid mode supports at most 4 real dimensions");
  if (cfg.step <= 0.0 || cfg.radius <= 0.0) throw DomainError("bad_grid", "radius and step must be positive");
  const auto per_axis = static_cast<Eigen::Index>(std::floor(2.0 * cfg.radius / cfg.step + 1e-9)) + 1;
  double total = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) total *= static_cast<double>(per_axis);
  if (total > 4e6) throw DomainError("grid_too_large", "grid has more than 4e6 points");
  const auto count = static_cast<Eigen::Index>(total);

  Eigen::MatrixXd points(n, count);
  Eigen::MatrixXd values(e.m(), count);
  for (Eigen::Index p = 0; p < count; ++p) {
    Eigen::Index rem = p;
    for (Eigen::Index i = 0; i < n; ++i) {
      // Symmetric grid: index k maps to -radius + k * step, centred so that
      // -x is on the grid whenever x is.
      const Eigen::Index k = rem % per_axis;
      rem /= per_axis;
      points(i, p) = (static_cast<double>(k) - static_cast<double>(per_axis - 1) / 2.0) * cfg.step;
    }
    values.col(p) = msq(points.col(p));
  }

  // Candidate tolerance: the M^2 variation across one grid cell.
  double lip = 0.0;
  for (Eigen::Index k = 0; k < e.m(); ++k) {
    const double an = e.rows.row(k).norm();
    lip = std::max(lip, 2.0 * an * (cfg.radius * std::sqrt(static_cast<double>(n)) * an + std::abs(e.shifts(k))));
  }
  const double cand_tol = lip * cfg.step + 1e-12;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(0, a) < values(0, b); });

  // Exact collisions first (cheap), then near-collisions refined by descent.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> near;
  const double exact_tol = 1e-12 * (1.0 + values.cwiseAbs().maxCoeff());
  const double min_sep = 2.0 * cfg.step;
  for (std::size_t a = 0; a < order.size(); ++a) {
    const Eigen::Index i = order[a];
    std::size_t scanned = 0;
    for (std::size_t b = a + 1; b < order.size() && scanned < 20000; ++b, ++scanned) {
      const Eigen::Index j = order[b];
      if (values(0, j) - values(0, i) > cand_tol) break;
      const double diff = (values.col(i) - values.col(j)).cwiseAbs().maxCoeff();
      if (diff > cand_tol) continue;
      if ((points.col(i) - points.col(j)).norm() < min_sep) continue;
      if (diff <= exact_tol) {
        if (auto w = refine(points.col(std::min(i, j)), points.col(std::max(i, j)))) return w;
      }
      if (static_cast<int>(near.size()) < cfg.max_candidates) near.emplace_back(std::min(i, j), std::max(i, j));
    }
  }
  for (const auto& [i, j] : near) {
    if (auto w = refine(points.col(i), points.col(j))) return w;
  }
  return std::nullopt;
}

}  // namespace affpr
