#include "helpers.hpp"

#include "affpr/construct.hpp"
#include "affpr/sparse.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace affpr;
using affpr::testing::require_sound;

namespace {

void require_support(const Signal& x, const std::vector<Eigen::Index>& support) {
  const std::set<Eigen::Index> allowed(support.begin(), support.end());
  for (Eigen::Index i = 0; i < x.dim(); ++i) {
    if (!allowed.count(i)) REQUIRE(x.entries(i) == cdouble(0.0));
  }
}

void require_sparse_sound(const MeasurementEnsemble& e, const SparseVerdict& v) {
  REQUIRE(v.outcome == Outcome::NotRetrievable);
  REQUIRE(v.witness);
  REQUIRE(v.failing_pair);
  require_sound(e, *v.witness);
  require_support(v.witness->x, v.failing_pair->first);
  require_support(v.witness->y, v.failing_pair->second);
}

/// Columns I u J of the ensemble.
MeasurementEnsemble restrict_columns(const MeasurementEnsemble& e, const SupportPair& p) {
  std::set<Eigen::Index> cols(p.first.begin(), p.first.end());
  cols.insert(p.second.begin(), p.second.end());
  Eigen::MatrixXcd a(e.m(), static_cast<Eigen::Index>(cols.size()));
  Eigen::Index k = 0;
  for (auto c : cols) a.col(k++) = e.rows.col(c);
  return {e.field, a, e.shifts};
}

}  // namespace

TEST_SUITE("sparse") {

TEST_CASE("support pair enumeration") {
  const auto pairs = support_pairs(3, 1);
  // Subsets {}, {0}, {1}, {2}: 4 * 5 / 2 pairs minus the empty pair.
  CHECK(pairs.size() == 9);
  CHECK(pairs.front().first.empty());
  CHECK(pairs.front().second == std::vector<Eigen::Index>{0});
  CHECK(pairs.back().first == std::vector<Eigen::Index>{2});
}

TEST_CASE("real sparse certifier at the threshold") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto two = sample_generic(ScalarField::Real, 2, 3, seed);
    require_sparse_sound(two, certify_sparse_real_exact(two, 1));
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    REQUIRE(certify_sparse_real_exact(sample_generic(ScalarField::Real, 3, 3, seed), 1).outcome == Outcome::Retrievable);
  }
}

TEST_CASE("zero shifts give a one-sparse antipodal witness") {
  for (Eigen::Index s = 1; s <= 2; ++s) {
    MeasurementEnsemble e = sample_generic(ScalarField::Real, 6, 4, static_cast<std::uint64_t>(s));
    e.shifts.setZero();
    const SparseVerdict v = certify_sparse_real_exact(e, s);
    require_sparse_sound(e, v);
    CHECK((v.witness->x.entries + v.witness->y.entries).norm() <= 1e-12);
    CHECK((v.witness->x.entries.array() != cdouble(0.0)).count() == 1);

    MeasurementEnsemble c = sample_generic(ScalarField::Complex, 6, 4, static_cast<std::uint64_t>(s));
    c.shifts.setZero();
    const SparseVerdict vc = falsify_sparse_complex(c, s);
    require_sparse_sound(c, vc);
    CHECK((vc.witness->x.entries.array() != cdouble(0.0)).count() == 1);
  }
}

TEST_CASE("sparse failures are dense failures on the support") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto e = sample_generic(ScalarField::Real, 3, 4, seed);
    const SparseVerdict v = certify_sparse_real_exact(e, 2);
    if (v.outcome != Outcome::NotRetrievable) continue;
    require_sparse_sound(e, v);
    const auto sub = restrict_columns(e, *v.failing_pair);
    CHECK(certify_real_exact(sub).outcome == Outcome::NotRetrievable);
  }
}

TEST_CASE("retrievable at s stays retrievable below s") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto e = sample_generic(ScalarField::Real, 5, 5, seed);
    if (certify_sparse_real_exact(e, 2).outcome == Outcome::Retrievable) {
      REQUIRE(certify_sparse_real_exact(e, 1).outcome == Outcome::Retrievable);
    }
  }
}

TEST_CASE("complex sparse falsifier") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto e = sample_generic(ScalarField::Complex, 2, 3, seed);
    FalsifyConfig cfg;
    cfg.seed = seed;
    require_sparse_sound(e, falsify_sparse_complex(e, 1, cfg));
  }
  const auto e = sample_generic(ScalarField::Complex, 5, 5, 42);
  FalsifyConfig cfg;
  cfg.restarts = 50;
  const SparseVerdict v = falsify_sparse_complex(e, 1, cfg);
  CHECK(v.outcome == Outcome::Inconclusive);
  CHECK(v.stats.note == "no witness found");
}

TEST_CASE("sparsity bounds and budgets") {
  const auto e = sample_generic(ScalarField::Real, 4, 3, 0);
  for (Eigen::Index s : {0, 3, 4}) {
    try {
      certify_sparse_real_exact(e, s);
      FAIL("sparsity accepted");
    } catch (const DomainError& err) {
      CHECK(err.code() == "bad_sparsity");
    }
  }
  SparseCertifyOptions tiny;
  tiny.work_budget = 10;
  try {
    certify_sparse_real_exact(e, 1, {}, tiny);
    FAIL("budget ignored");
  } catch (const DomainError& err) {
    CHECK(err.code() == "budget_exceeded");
  }
  CHECK_THROWS_AS(falsify_sparse_complex(e, 1), DomainError);
}

TEST_CASE("sparse sampling") {
  const Signal dense = sample_sparse_signal(4, 4, ScalarField::Real, 1);
  CHECK((dense.entries.array() != cdouble(0.0)).count() == 4);
  CHECK(sample_sparse_signal(6, 2, ScalarField::Complex, 9).entries == sample_sparse_signal(6, 2, ScalarField::Complex, 9).entries);

  // Chi-square goodness of fit over the 10 supports of size 2 in dimension 5.
  std::map<std::vector<Eigen::Index>, int> counts;
  const int draws = 10'000;
  for (int i = 0; i < draws; ++i) {
    const Signal x = sample_sparse_signal(5, 2, ScalarField::Real, static_cast<std::uint64_t>(i));
    std::vector<Eigen::Index> support;
    for (Eigen::Index k = 0; k < 5; ++k)
      if (x.entries(k) != cdouble(0.0)) support.push_back(k);
    REQUIRE(support.size() == 2);
    ++counts[support];
  }
  REQUIRE(counts.size() == 10);
  const double expected = draws / 10.0;
  double chi2 = 0.0;
  for (const auto& [support, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 99th percentile of chi-square with 9 degrees of freedom.
  CHECK(chi2 < 21.666);
}

}
