// Signal recovery from magnitude data.
//
// The stacked constructions admit closed-form, coordinate-by-coordinate
// inversion. General ensembles go through a lifted spectral initialiser and a
// damped Gauss-Newton (Levenberg-Marquardt) solve on the squared magnitudes.
#pragma once

#include "affpr/core.hpp"

#include <cstdint>
#include <vector>

namespace affpr {

struct CoordinatewiseResult {
  Signal x;
  /// ||measure(E, x) - mags||_2; zero up to rounding for consistent data.
  double inconsistency = 0.0;
  bool consistent = false;
};

/// Inverts the (B, B)^T real family: per coordinate
///   w_j = (m_j1^2 - m_j2^2 + b_j2^2 - b_j1^2) / (2 (b_j1 - b_j2)),
/// then x solves F x = w for the stored block F.
CoordinatewiseResult recover_coordinatewise_real(const MeasurementEnsemble& e, const MagnitudeVector& mags);

/// Inverts the (B, B, B)^T complex family from two differences of
/// |w + b_k|^2 per coordinate, picked by largest shift separation.
CoordinatewiseResult recover_coordinatewise_complex(const MeasurementEnsemble& e, const MagnitudeVector& mags,
                                                    double min_margin = 1e-12);

struct SpectralInit {
  Signal x;
  bool fallback = false;  // last lifted coordinate vanished; x is zero
};

SpectralInit spectral_init(const MeasurementEnsemble& e, const MagnitudeVector& mags);

struct GaussNewtonConfig {
  int max_iterations = 200;
  int restarts = 20;
  double damping_init = 1e-3;       // times trace(J^T J) / n
  double success_relative = 1e-12;  // times 1 + ||mags^2||
  std::uint64_t seed = 0;
};

struct RecoveryResult {
  Signal x_hat;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  int restarts_used = 0;
  /// Residual after every accepted step of the returned run.
  std::vector<double> residual_history;
};

RecoveryResult recover_gauss_newton(const MeasurementEnsemble& e, const MagnitudeVector& mags,
                                    const Signal& init, const GaussNewtonConfig& cfg = {});

/// Coordinatewise inversion for the stacked families, spectral init plus
/// Gauss-Newton otherwise.
RecoveryResult recover(const MeasurementEnsemble& e, const MagnitudeVector& mags,
                       const GaussNewtonConfig& cfg = {});

}  // namespace affpr
