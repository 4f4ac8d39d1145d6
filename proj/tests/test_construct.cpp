#include "helpers.hpp"

#include "affpr/construct.hpp"
#include "affpr/linalg.hpp"

#include <cmath>
#include <limits>

using namespace affpr;
using affpr::testing::random_signal;
using affpr::testing::require_sound;

namespace {

template <class F>
std::string error_code(F&& f) {
  try {
    f();
  } catch (const DomainError& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_SUITE("construct") {

TEST_CASE("real minimal construction") {
  const auto e1 = build_real_minimal(1, ShiftPairSpec{{{0.0, 1.0}}});
  CHECK(e1.rows.real() == Eigen::MatrixXd::Ones(2, 1));
  CHECK(e1.shifts.real() == Eigen::Vector2d(0, 1));

  const auto e2 = build_real_minimal(2, ShiftPairSpec{{{1.0, 0.0}, {2.0, 3.0}}});
  CHECK(e2.m() == 4);
  CHECK(validate_ensemble(e2).empty());
  CHECK(certify_real_exact(e2).outcome == Outcome::Retrievable);
  const Verdict s = certify_structured(e2);
  CHECK(s.outcome == Outcome::Retrievable);
  CHECK(s.certificate == Certificate::StructuredConstruction);

  CHECK(error_code([] { build_real_minimal(1, ShiftPairSpec{{{1.0, 1.0}}}); }) == "equal_shift_pair");
}

TEST_CASE("complex minimal construction") {
  const ShiftTripleSpec t1{{{cdouble(0), cdouble(1), cdouble(0, 1)}}};
  const auto e1 = build_complex_minimal(Eigen::MatrixXcd::Ones(1, 1), t1);
  CHECK(e1.rows == Eigen::MatrixXcd::Ones(3, 1));
  CHECK(e1.shifts == Eigen::Vector3cd(0, 1, cdouble(0, 1)));

  const ShiftTripleSpec t2{{{cdouble(0), cdouble(1), cdouble(0, 1)}, {cdouble(0, 1), cdouble(0), cdouble(1)}}};
  const auto e2 = build_complex_minimal(Eigen::MatrixXcd::Identity(2, 2), t2);
  CHECK(e2.m() == 6);
  CHECK(validate_ensemble(e2).empty());
  CHECK(certify_structured(e2).outcome == Outcome::Retrievable);

  try {
    build_complex_minimal(Eigen::MatrixXcd::Ones(1, 1), ShiftTripleSpec{{{cdouble(0), cdouble(1), cdouble(2)}}});
    FAIL("collinear triple accepted");
  } catch (const DomainError& e) {
    CHECK(e.code() == "collinear_triple");
    CHECK(std::string(e.what()).find("margin 0") != std::string::npos);
  }
  CHECK(error_code([&] { build_complex_minimal(Eigen::MatrixXcd::Zero(2, 2), t2); }) == "singular_block");
  CHECK(t1.margins().at(0) == 1.0);
}

TEST_CASE("generic sampling is deterministic") {
  const auto a = sample_generic(ScalarField::Real, 6, 3, 7);
  const auto b = sample_generic(ScalarField::Real, 6, 3, 7);
  CHECK(a.rows == b.rows);
  CHECK(a.shifts == b.shifts);
  CHECK(validate_ensemble(a).empty());
  CHECK(a.rows.imag().isZero(0.0));
  CHECK(sample_generic(ScalarField::Real, 6, 3, 8).rows != a.rows);
  // Row j depends only on (seed, j).
  CHECK(sample_generic(ScalarField::Real, 9, 3, 7).rows.topRows(6) == a.rows);
  CHECK(validate_ensemble(sample_generic(ScalarField::Complex, 5, 2, 1)).empty());
}

TEST_CASE("generic real ensembles switch at 2d") {
  for (Eigen::Index d = 1; d <= 3; ++d) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      REQUIRE(certify_real_exact(sample_generic(ScalarField::Real, 2 * d, d, seed)).outcome == Outcome::Retrievable);
      REQUIRE(certify_real_exact(sample_generic(ScalarField::Real, 2 * d - 1, d, seed)).outcome ==
              Outcome::NotRetrievable);
    }
  }
}

TEST_CASE("real perturbation") {
  const auto base = build_real_minimal(2, default_perturbation_pairs(2));
  CHECK(base.shifts.real() == Eigen::Vector4d(1, 2, 0, 3));
  const auto r = perturb_real(base, 0.5);
  CHECK(r.perturbed.rows(0, 1) == cdouble(0.5));
  CHECK(r.witness.x.entries.real() == Eigen::Vector2d(1, -2));
  CHECK(r.witness.y.entries.real() == Eigen::Vector2d(-1, -2));
  const Eigen::VectorXd mx = measure(r.perturbed, r.witness.x).values;
  CHECK(mx == Eigen::Vector4d(1, 0, 1, 1));
  CHECK(measure(r.perturbed, r.witness.y).values == mx);
  CHECK(r.frobenius_distance == 0.5);

  for (double delta : {1e-1, 1e-3}) {
    const auto p = perturb_real(base, delta);
    CHECK(certify_real_exact(base).outcome == Outcome::Retrievable);
    const Verdict v = certify_real_exact(p.perturbed);
    CHECK(v.outcome == Outcome::NotRetrievable);
    require_sound(p.perturbed, *v.witness);
    require_sound(p.perturbed, p.witness);
    CHECK(std::abs(p.frobenius_distance - delta) <= std::numeric_limits<double>::epsilon() * delta);
  }

  // Larger b_11 scales the distance.
  const auto scaled = perturb_real(build_real_minimal(2, ShiftPairSpec{{{2.5, 0.0}, {1.0, 3.0}}}), 0.01);
  CHECK(std::abs(scaled.frobenius_distance - 2.5 * 0.01) <= std::numeric_limits<double>::epsilon() * 0.025);
  CHECK(validate_ensemble(scaled.perturbed).empty());

  CHECK(error_code([&] { perturb_real(base, 0.0); }) == "precondition_delta");
  CHECK(error_code([&] { perturb_real(affpr::testing::d1_pair(), 0.1); }) == "precondition_d");
  CHECK(error_code([&] { perturb_real(build_real_minimal(2, ShiftPairSpec{{{0.0, 1.0}, {0.0, 3.0}}}), 0.1); }) ==
        "precondition_b12");
  CHECK(error_code([&] { perturb_real(sample_generic(ScalarField::Real, 4, 2, 0), 0.1); }) == "precondition_pattern");
}

TEST_CASE("complex perturbation") {
  const auto base = default_perturbation_base_complex(2);
  CHECK(certify_structured(base).outcome == Outcome::Retrievable);
  const auto r = perturb_complex(base, 1.0);
  CHECK(r.witness.x.entries == Eigen::Vector2cd(cdouble(0, 1), -1));
  CHECK(r.witness.y.entries == Eigen::Vector2cd(cdouble(0, -1), -1));
  const Eigen::VectorXd mx = measure(r.perturbed, r.witness.x).values;
  Eigen::VectorXd expected(6);
  expected << 1, std::sqrt(2.0), 1, 1, std::sqrt(2.0), 0;
  CHECK((mx - expected).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((measure(r.perturbed, r.witness.y).values - mx).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(r.frobenius_distance == 1.0);

  for (double delta : {1e-1, 1e-2, 1e-3}) {
    const auto p = perturb_complex(base, delta);
    require_sound(p.perturbed, p.witness);
    CHECK(std::abs(p.frobenius_distance - delta) <= std::numeric_limits<double>::epsilon() * delta);
    const Verdict v = falsify_complex(p.perturbed);
    CHECK(v.outcome == Outcome::NotRetrievable);
    if (v.witness) require_sound(p.perturbed, *v.witness);
  }
}

TEST_CASE("real witnesses below 2d") {
  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  const auto e = MeasurementEnsemble::real(a, Eigen::Vector3d(1, 2, 3));
  const WitnessPair w = witness_subminimal_real(e);
  require_sound(e, w);
  const UVWitness uv = to_uv(w);
  // v solves the affine forms of the pivot subset; u spans the complementary kernel.
  CHECK(violates_condition_c(e, uv.u, uv.v).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((a * uv.v.real_part() + Eigen::Vector3d(1, 2, 3)).cwiseAbs().minCoeff() <= 1e-12);

  const auto zero = MeasurementEnsemble::real(Eigen::MatrixXd::Zero(3, 2), Eigen::Vector3d(1, 2, 3));
  const WitnessPair wz = witness_subminimal_real(zero);
  CHECK(wz.x.norm() == 0.0);
  CHECK(wz.y.entries.real().cwiseAbs() == Eigen::Vector2d(1, 0));

  for (Eigen::Index d = 2; d <= 4; ++d) {
    for (std::uint64_t seed = 0; seed < 334; ++seed) {
      const auto en = sample_generic(ScalarField::Real, 2 * d - 1, d, seed);
      require_sound(en, witness_subminimal_real(en));
    }
  }
  CHECK_THROWS_AS(witness_subminimal_real(sample_generic(ScalarField::Real, 4, 2, 0)), DomainError);
}

TEST_CASE("complex witnesses below 3d") {
  const auto e = MeasurementEnsemble::complex(Eigen::MatrixXcd::Ones(2, 1), Eigen::Vector2cd(0, 1));
  const WitnessPair w = witness_subminimal_complex(e);
  require_sound(e, w);
  // The only collisions are (it, -it).
  CHECK(std::abs(w.x.entries(0).real()) <= 1e-12);
  CHECK(std::abs(w.x.entries(0) + w.y.entries(0)) <= 1e-12);

  const auto zero = MeasurementEnsemble::complex(Eigen::MatrixXcd::Zero(2, 2), Eigen::Vector2cd(1, 2));
  require_sound(zero, witness_subminimal_complex(zero));

  for (Eigen::Index d = 2; d <= 4; ++d) {
    for (std::uint64_t seed = 0; seed < 167; ++seed) {
      const auto en = sample_generic(ScalarField::Complex, 3 * d - 1, d, seed);
      require_sound(en, witness_subminimal_complex(en));
    }
  }
}

}
