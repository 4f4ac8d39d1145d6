#include "affpr/recover.hpp"

#include "affpr/certify.hpp"
#include "affpr/linalg.hpp"
#include "affpr/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace affpr {

namespace {

void require_mags(const MeasurementEnsemble& e, const MagnitudeVector& mags) {
  if (mags.size() != e.m()) {
    throw DomainError("dimension_mismatch", "expected " + std::to_string(e.m()) + " magnitudes, got " +
                                                std::to_string(mags.size()));
  }
  if (!mags.values.allFinite()) throw DomainError("non_finite", "magnitudes must be finite");
  if ((mags.values.array() < 0.0).any()) throw DomainError("negative_magnitude", "magnitudes must be nonnegative");
}

CoordinatewiseResult finish(const MeasurementEnsemble& e, const MagnitudeVector& mags, Signal x) {
  CoordinatewiseResult r;
  const Eigen::VectorXd back = measure(e, x).values;
  r.inconsistency = (back - mags.values).norm();
  const double worst = (back - mags.values).cwiseAbs().maxCoeff();
  r.consistent = worst <= 1e-9 * (1.0 + mags.values.cwiseAbs().maxCoeff());
  r.x = std::move(x);
  return r;
}

}  // namespace

CoordinatewiseResult recover_coordinatewise_real(const MeasurementEnsemble& e, const MagnitudeVector& mags) {
  require_valid(e);
  if (e.field != ScalarField::Real) throw DomainError("field_mismatch", "expected a real ensemble");
  require_mags(e, mags);
  const auto pattern = detect_stacked_blocks(e, 2);
  if (!pattern) throw DomainError("pattern_mismatch", "ensemble is not a stacked (B, B)^T pair");
  const Eigen::Index d = e.d();
  const Eigen::VectorXd b = e.real_shifts();
  const Eigen::VectorXd& m = mags.values;
  Eigen::VectorXd w(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double b1 = b(j), b2 = b(d + j);
    if (b1 == b2) throw DomainError("pattern_mismatch", "equal shift pair at coordinate " + std::to_string(j));
    w(j) = (m(j) * m(j) - m(d + j) * m(d + j) + b2 * b2 - b1 * b1) / (2.0 * (b1 - b2));
  }
  const Eigen::MatrixXd block = pattern->block.real();
  Eigen::VectorXd x;
  if (block.isIdentity(0.0)) {
    x = w;
  } else {
    if (relative_rank(block, RankTolerance{}) < d) throw DomainError("singular_block", "stacked block is singular");
    x = block.colPivHouseholderQr().solve(w);
  }
  return finish(e, mags, Signal::real(x));
}

CoordinatewiseResult recover_coordinatewise_complex(const MeasurementEnsemble& e, const MagnitudeVector& mags,
                                                    double min_margin) {
  require_valid(e);
  if (e.field != ScalarField::Complex) throw DomainError("field_mismatch", "expected a complex ensemble");
  require_mags(e, mags);
  const auto pattern = detect_stacked_blocks(e, 3);
  if (!pattern) throw DomainError("pattern_mismatch", "ensemble is not a stacked (B, B, B)^T triple");
  const Eigen::Index d = e.d();
  const Eigen::VectorXd& m = mags.values;
  constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

  Eigen::VectorXcd w(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const std::array<cdouble, 3> b{e.shifts(j), e.shifts(d + j), e.shifts(2 * d + j)};
    const std::array<double, 3> msq{m(j) * m(j), m(d + j) * m(d + j), m(2 * d + j) * m(2 * d + j)};
    const double scale = 1.0 + std::max({std::norm(b[0]), std::norm(b[1]), std::norm(b[2])});
    const double margin = collinearity_margin(b[0], b[1], b[2]);
    if (!(margin > min_margin * scale)) {
      throw DomainError("conditioning", "shift triple at coordinate " + std::to_string(j) +
                                            " is (nearly) collinear, margin " + std::to_string(margin));
    }
    // Two largest separations, ties by pair order.
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int p, int q) {
      const auto& a = kPairs[static_cast<std::size_t>(p)];
      const auto& c = kPairs[static_cast<std::size_t>(q)];
      return std::abs(b[static_cast<std::size_t>(a[0])] - b[static_cast<std::size_t>(a[1])]) >
             std::abs(b[static_cast<std::size_t>(c[0])] - b[static_cast<std::size_t>(c[1])]);
    });
    // |w + b_k|^2 - |w + b_l|^2 = 2 Re w (Re b_k - Re b_l) + 2 Im w (Im b_k - Im b_l) + |b_k|^2 - |b_l|^2
    Eigen::Matrix2d lhs;
    Eigen::Vector2d rhs;
    for (int r = 0; r < 2; ++r) {
      const auto& pr = kPairs[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
      const cdouble bk = b[static_cast<std::size_t>(pr[0])];
      const cdouble bl = b[static_cast<std::size_t>(pr[1])];
      lhs(r, 0) = 2.0 * (bk.real() - bl.real());
      lhs(r, 1) = 2.0 * (bk.imag() - bl.imag());
      rhs(r) = msq[static_cast<std::size_t>(pr[0])] - msq[static_cast<std::size_t>(pr[1])] - std::norm(bk) +
               std::norm(bl);
    }
    const Eigen::Vector2d z = lhs.partialPivLu().solve(rhs);
    w(j) = cdouble(z(0), z(1));
  }
  Eigen::VectorXcd x;
  if (pattern->block.isIdentity(0.0)) {
    x = w;
  } else {
    if (relative_rank(pattern->block, RankTolerance{}) < d) {
      throw DomainError("singular_block", "stacked block is singular");
    }
    x = pattern->block.colPivHouseholderQr().solve(w);
  }
  return finish(e, mags, Signal::complex(x));
}

SpectralInit spectral_init(const MeasurementEnsemble& e, const MagnitudeVector& mags) {
  require_valid(e);
  require_mags(e, mags);
  const Eigen::Index d = e.d();
  const LiftedEnsemble l = lift(e);
  const Eigen::VectorXd w = mags.values.cwiseAbs2() / static_cast<double>(e.m());
  const Eigen::MatrixXcd y = l.rows.adjoint() * w.asDiagonal() * l.rows;
  SpectralInit out;
  if (y.isZero(0.0)) {
    out.x = Signal::zero(e.field, d);
    out.fallback = true;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(y);
  const Eigen::VectorXcd top = es.eigenvectors().col(d);
  if (std::abs(top(d)) < 1e-8) {
    out.x = Signal::zero(e.field, d);
    out.fallback = true;
    return out;
  }
  Eigen::VectorXcd x = top.head(d) / top(d);
  if (e.field == ScalarField::Real) x = x.real().cast<cdouble>();
  out.x = Signal(e.field, x);
  return out;
}

namespace {

struct Run {
  Eigen::VectorXd theta;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::vector<double> history;
};

Run levenberg_marquardt(const MeasurementEnsemble& e, const Eigen::VectorXd& target, Eigen::VectorXd theta,
                        const GaussNewtonConfig& cfg, double threshold) {
  auto residual = [&](const Eigen::VectorXd& t) {
    return Eigen::VectorXd(measure_sq(e, from_real_coords(e.field, t)) - target);
  };
  Run run;
  Eigen::VectorXd r = residual(theta);
  double cost = r.norm();
  run.history.push_back(cost);
  const Eigen::Index n = theta.size();
  double lambda = -1.0;
  for (int it = 0; it < cfg.max_iterations && cost > threshold; ++it) {
    const Eigen::MatrixXd j = measure_sq_jacobian(e, from_real_coords(e.field, theta));
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;
    if (lambda < 0.0) lambda = cfg.damping_init * std::max(jtj.trace() / static_cast<double>(n), 1e-300);
    bool accepted = false;
    while (lambda < 1e20 * (1.0 + jtj.trace())) {
      Eigen::MatrixXd lhs = jtj;
      lhs.diagonal().array() += lambda;
      const Eigen::VectorXd step = lhs.ldlt().solve(-g);
      const Eigen::VectorXd cand = theta + step;
      const Eigen::VectorXd rc = residual(cand);
      const double cc = rc.norm();
      if (std::isfinite(cc) && cc < cost) {
        theta = cand;
        r = rc;
        cost = cc;
        lambda /= 3.0;
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    run.iterations = it + 1;
    if (!accepted) break;
    run.history.push_back(cost);
  }
  run.theta = theta;
  run.residual = cost;
  return run;
}

}  // namespace

RecoveryResult recover_gauss_newton(const MeasurementEnsemble& e, const MagnitudeVector& mags, const Signal& init,
                                    const GaussNewtonConfig& cfg) {
  require_valid(e);
  require_mags(e, mags);
  require_compatible(e, init);
  if (!init.entries.allFinite()) throw DomainError("non_finite", "initial point must be finite");
  if (cfg.max_iterations < 1 || cfg.restarts < 0 || cfg.damping_init <= 0.0 || cfg.success_relative <= 0.0) {
    throw DomainError("bad_config", "Gauss-Newton configuration values must be positive");
  }
  const Eigen::VectorXd target = mags.values.cwiseAbs2();
  const double threshold = cfg.success_relative * (1.0 + target.norm());
  const Eigen::VectorXd start = to_real_coords(init);
  const Eigen::Index n = start.size();

  Run best = levenberg_marquardt(e, target, start, cfg, threshold);
  int used = 0;
  GaussianStream rng(derive_seed(cfg.seed, {0x676eull}));
  for (int k = 1; k <= cfg.restarts && best.residual > threshold; ++k) {
    // Perturbations grow with the restart index.
    const double spread = (0.25 + 0.25 * k) * (1.0 + start.norm()) / std::sqrt(static_cast<double>(n));
    const Eigen::VectorXd t0 = start + spread * rng.normal_vector(n);
    Run run = levenberg_marquardt(e, target, t0, cfg, threshold);
    used = k;
    if (run.residual < best.residual) best = std::move(run);
  }

  RecoveryResult out;
  out.x_hat = from_real_coords(e.field, best.theta);
  out.residual = best.residual;
  out.iterations = best.iterations;
  out.converged = best.residual <= threshold;
  out.restarts_used = used;
  out.residual_history = std::move(best.history);
  return out;
}

RecoveryResult recover(const MeasurementEnsemble& e, const MagnitudeVector& mags, const GaussNewtonConfig& cfg) {
  require_valid(e);
  require_mags(e, mags);
  const Verdict structured = certify_structured(e);
  if (structured.outcome == Outcome::Retrievable) {
    const CoordinatewiseResult c = e.field == ScalarField::Real ? recover_coordinatewise_real(e, mags)
                                                                 : recover_coordinatewise_complex(e, mags);
    RecoveryResult out;
    out.x_hat = c.x;
    out.residual = (measure_sq(e, c.x) - mags.values.cwiseAbs2()).norm();
    out.converged = c.consistent;
    return out;
  }
  return recover_gauss_newton(e, mags, spectral_init(e, mags).x, cfg);
}

}  // namespace affpr
