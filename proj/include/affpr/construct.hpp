// Ensembles with known retrievability: the minimal stacked constructions, the
// generic Gaussian ensembles, constructive collisions below the minimal counts
// and the small perturbations that break retrievability.
#pragma once

#include "affpr/certify.hpp"
#include "affpr/core.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace affpr {

/// Per-coordinate real shift pairs (b_j1, b_j2), b_j1 != b_j2.
struct ShiftPairSpec {
  std::vector<std::pair<double, double>> pairs;
};

/// Per-coordinate complex shift triples, pairwise non-collinear.
struct ShiftTripleSpec {
  std::vector<std::array<cdouble, 3>> triples;

  std::vector<double> margins() const;
};

struct PerturbationReport {
  MeasurementEnsemble original;
  MeasurementEnsemble perturbed;
  double delta = 0.0;
  double frobenius_distance = 0.0;
  WitnessPair witness;
};

/// Rows (I_d; I_d), shifts (b_11..b_d1, b_12..b_d2). m = 2d.
MeasurementEnsemble build_real_minimal(Eigen::Index d, const ShiftPairSpec& spec);

/// Rows (B^T; B^T; B^T), shifts grouped by copy. m = 3d.
MeasurementEnsemble build_complex_minimal(const Eigen::MatrixXcd& b, const ShiftTripleSpec& spec,
                                          const RankTolerance& tol = {});

/// I.i.d. standard Gaussian entries (independent real and imaginary parts for
/// the complex field). Row j draws from its own stream keyed by (seed, j), so
/// the first rows of an ensemble do not depend on m.
MeasurementEnsemble sample_generic(ScalarField field, Eigen::Index m, Eigen::Index d, std::uint64_t seed);

/// Pairs (j, j + 1) with b_12 = 0, the normalisation the real perturbation
/// needs: d = 2 gives shifts (1, 2, 0, 3).
ShiftPairSpec default_perturbation_pairs(Eigen::Index d);
/// (I, I, I) with shifts (i..i, 0..0, 1..1).
MeasurementEnsemble default_perturbation_base_complex(Eigen::Index d);

PerturbationReport perturb_real(const MeasurementEnsemble& e, double delta);
PerturbationReport perturb_complex(const MeasurementEnsemble& e, double delta);

WitnessPair witness_subminimal_real(const MeasurementEnsemble& e, const RankTolerance& tol = {});
WitnessPair witness_subminimal_complex(const MeasurementEnsemble& e, const RankTolerance& tol = {});

}  // namespace affpr
