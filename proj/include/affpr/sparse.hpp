// Injectivity on s-sparse signals.
//
// Two s-sparse signals x (support in I) and y (support in J) collide iff for
// every measurement j either <a_j, x - y> = 0 or <a_j, x + y> + 2 b_j = 0. For
// real data this is a finite family of linear systems, one per subset T of
// measurements where the first factor vanishes, so the certifier is exact.
#pragma once

#include "affpr/certify.hpp"
#include "affpr/core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace affpr {

struct SupportPair {
  std::vector<Eigen::Index> first;   // I
  std::vector<Eigen::Index> second;  // J
};

struct SparseVerdict {
  Outcome outcome = Outcome::Inconclusive;
  std::optional<SupportPair> failing_pair;
  std::optional<WitnessPair> witness;
  /// Real certifier: measurements where <a_j, x - y> = 0 was imposed.
  std::vector<Eigen::Index> failing_subset;
  SearchStats stats;
};

struct SparseCertifyOptions {
  int enumeration_cap = 24;
  /// Hard limit on the estimated scalar operation count.
  double work_budget = 1e9;
};

/// Estimated scalar operations: (#support pairs) * 2^m * m * (2s)^2.
double sparse_work_estimate(Eigen::Index m, Eigen::Index d, Eigen::Index s);

/// Support pairs in enumeration order: subsets of size 0..s ordered by size then
/// lexicographically; pairs (I, J) with I not after J; (empty, empty) skipped.
std::vector<SupportPair> support_pairs(Eigen::Index d, Eigen::Index s);

SparseVerdict certify_sparse_real_exact(const MeasurementEnsemble& e, Eigen::Index s,
                                        const RankTolerance& tol = {}, const SparseCertifyOptions& opts = {});

/// Restricted descent per support pair; NotRetrievable with a verified sparse
/// witness, otherwise Inconclusive.
SparseVerdict falsify_sparse_complex(const MeasurementEnsemble& e, Eigen::Index s, const FalsifyConfig& cfg = {});

/// Uniform random size-s support with Gaussian nonzeros.
Signal sample_sparse_signal(Eigen::Index d, Eigen::Index s, ScalarField field, std::uint64_t seed);

}  // namespace affpr
