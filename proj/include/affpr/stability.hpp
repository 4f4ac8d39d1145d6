// Empirical bi-Lipschitz constants of the magnitude maps on a ball, and the
// ratio showing that no global lower bound exists.
//
//   c1 ||x - y|| / (1 + ||x|| + ||y||) <= ||M(x) - M(y)||   <= C1 ||x - y||
//   c2 ||x - y||                       <= ||M2(x) - M2(y)|| <= C2 (1 + ||x|| + ||y||) ||x - y||
#pragma once

#include "affpr/certify.hpp"
#include "affpr/core.hpp"

#include <cstdint>
#include <vector>

namespace affpr {

struct AttainingPair {
  WitnessPair pair;
  double ratio = 0.0;
  /// Sample index; extra pairs are numbered after the random ones.
  std::int64_t index = -1;
};

struct LipschitzEstimate {
  double c1_hat = 0.0;
  double C1_hat = 0.0;
  double c2_hat = 0.0;
  double C2_hat = 0.0;
  std::int64_t samples = 0;
  double radius = 0.0;
  std::uint64_t seed = 0;
  AttainingPair c1_pair, C1_pair, c2_pair, C2_pair;
};

struct PairRatios {
  double r1_lower = 0.0;  // ||M(x)-M(y)|| (1+||x||+||y||) / ||x-y||
  double r1_upper = 0.0;  // ||M(x)-M(y)|| / ||x-y||
  double r2_lower = 0.0;  // ||M2(x)-M2(y)|| / ||x-y||
  double r2_upper = 0.0;  // ||M2(x)-M2(y)|| / ((1+||x||+||y||) ||x-y||)
};

/// The four normalized ratios of one pair; x != y required.
PairRatios pair_ratios(const MeasurementEnsemble& e, const Signal& x, const Signal& y);

/// Uniform point in the radius-r ball of the signal space.
Signal sample_ball(ScalarField field, Eigen::Index d, double radius, std::uint64_t seed);

/// n random pairs, pair i drawn from derive_seed(seed, {i}), plus any extra
/// pairs (for instance a known witness). Ties keep the lowest index.
LipschitzEstimate estimate_lipschitz(const MeasurementEnsemble& e, double radius, std::int64_t n,
                                     std::uint64_t seed, const std::vector<WitnessPair>& extra = {},
                                     std::vector<PairRatios>* all_ratios = nullptr);

/// ||M(r x0) - M(-r x0)|| / (2 r ||x0||).
double anisotropy_ratio(const MeasurementEnsemble& e, const Signal& x0, double r);

}  // namespace affpr
