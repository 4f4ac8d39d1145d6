#include "helpers.hpp"

#include "affpr/construct.hpp"

#include <cmath>

using namespace affpr;
using affpr::testing::random_signal;
using affpr::testing::require_sound;

namespace {

MeasurementEnsemble stacked_identity() {
  return build_real_minimal(2, ShiftPairSpec{{{1.0, 0.0}, {2.0, 3.0}}});
}

void require_uv_sound(const MeasurementEnsemble& e, const Verdict& v) {
  REQUIRE(v.uv);
  CHECK(v.uv->u.norm() > 1e-6);
  CHECK(violates_condition_c(e, v.uv->u, v.uv->v).cwiseAbs().maxCoeff() <= 1e-9);
}

Eigen::MatrixXd central_differences(const MeasurementEnsemble& e, const Signal& x, double h) {
  const Eigen::VectorXd t = to_real_coords(x);
  Eigen::MatrixXd j(e.m(), t.size());
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    Eigen::VectorXd p = t, q = t;
    p(k) += h;
    q(k) -= h;
    j.col(k) = (measure_sq(e, from_real_coords(x.field, p)) - measure_sq(e, from_real_coords(x.field, q))) / (2 * h);
  }
  return j;
}

}  // namespace

TEST_SUITE("certify") {

TEST_CASE("stacked identities with distinct shift pairs are retrievable") {
  const auto e = stacked_identity();
  CHECK(e.shifts.real() == Eigen::Vector4d(1, 2, 0, 3));
  const Verdict v = certify_real_exact(e);
  CHECK(v.outcome == Outcome::Retrievable);
  CHECK(v.certificate == Certificate::ExactSubsetCheck);
  CHECK(!v.witness);
  CHECK(v.stats.subsets_checked == 16);
}

TEST_CASE("zero shifts are never retrievable") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    MeasurementEnsemble e = sample_generic(ScalarField::Real, 7, 3, seed);
    e.shifts.setZero();
    const Verdict v = certify_real_exact(e);
    REQUIRE(v.outcome == Outcome::NotRetrievable);
    REQUIRE(v.witness);
    require_sound(e, *v.witness);
    require_uv_sound(e, v);
    // x and y are negatives of each other.
    CHECK((v.witness->x.entries + v.witness->y.entries).norm() <= 1e-12);
  }
}

TEST_CASE("d = 1 with shifts 0 and 1 is retrievable") {
  const auto e = affpr::testing::d1_pair();
  CHECK(certify_real_exact(e).outcome == Outcome::Retrievable);
  CHECK(!brute_force_collision_search(e));
}

TEST_CASE("condition residuals") {
  Eigen::MatrixXd a(3, 2);
  a << 1, 2, -1, 0.5, 3, 1;
  const Eigen::Vector2d root(0.25, -1.5);
  const auto e = MeasurementEnsemble::real(a, -(a * root));
  const Signal u = Signal::real(Eigen::Vector2d(0.3, -2.0));
  CHECK(violates_condition_c(e, u, Signal::real(root)).isZero(0.0));
  CHECK(violates_condition_c(e, Signal::real(Eigen::Vector2d::Zero()), Signal::real(Eigen::Vector2d(1, 1))).isZero(0.0));

  // Complex form equals (|r x + b|^2 - |r y + b|^2) / 4.
  const auto c = sample_generic(ScalarField::Complex, 5, 2, 3);
  const Signal uc = random_signal(ScalarField::Complex, 2, 4);
  const Signal vc = random_signal(ScalarField::Complex, 2, 5);
  const Signal xc(ScalarField::Complex, vc.entries + uc.entries);
  const Signal yc(ScalarField::Complex, vc.entries - uc.entries);
  const Eigen::VectorXd lhs = violates_condition_c(c, uc, vc);
  const Eigen::VectorXd rhs = (measure_sq(c, xc) - measure_sq(c, yc)) / 4.0;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * (1 + rhs.cwiseAbs().maxCoeff()));
}

TEST_CASE("jacobian") {
  const auto e = affpr::testing::d1_pair();
  const Eigen::MatrixXd j = jacobian(e, Signal::real(Eigen::VectorXd::Constant(1, 3.0)));
  REQUIRE(j.rows() == 1);
  REQUIRE(j.cols() == 2);
  CHECK(j(0, 0) == 3.0);
  CHECK(j(0, 1) == 4.0);

  Eigen::MatrixXd a(3, 2);
  a << 1, 2, -1, 0.5, 3, 1;
  const Eigen::Vector2d root(0.25, -1.5);
  const auto er = MeasurementEnsemble::real(a, -(a * root));
  CHECK(jacobian(er, Signal::real(root)).isZero(0.0));
  CHECK(jacobian_rank_deficit(er, Signal::real(root)) == 2);

  Eigen::MatrixXcd ac = a.cast<cdouble>() * cdouble(1.0, -0.5);
  const Eigen::VectorXcd rootc = Eigen::Vector2cd(cdouble(1, 2), cdouble(-0.5, 0.25));
  const auto ec = MeasurementEnsemble::complex(ac, -(ac * rootc));
  CHECK(jacobian_rank_deficit(ec, Signal::complex(rootc)) == 4);
}

TEST_CASE("jacobian matches central differences") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ScalarField f = seed % 2 ? ScalarField::Complex : ScalarField::Real;
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(seed % 4);
    const auto e = sample_generic(f, 3 * d, d, seed);
    const Signal x = random_signal(f, d, seed + 500);
    const Eigen::MatrixXd analytic = measure_sq_jacobian(e, x);
    const Eigen::MatrixXd numeric = central_differences(e, x, 1e-5);
    const double rel = (analytic - numeric).cwiseAbs().maxCoeff() / (1.0 + analytic.cwiseAbs().maxCoeff());
    REQUIRE(rel <= 1e-6);
    if (f == ScalarField::Real) {
      CHECK((analytic - 2.0 * jacobian(e, x).transpose()).cwiseAbs().maxCoeff() == 0.0);
    } else {
      CHECK(analytic == jacobian(e, x));
    }
  }
}

TEST_CASE("retrievable ensembles have full-rank jacobians") {
  const auto e = stacked_identity();
  REQUIRE(certify_real_exact(e).outcome == Outcome::Retrievable);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    REQUIRE(jacobian_rank_deficit(e, random_signal(ScalarField::Real, 2, seed)) == 0);
  }
}

TEST_CASE("jacobian is deficient at the v of a witness") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto e = sample_generic(ScalarField::Real, 3, 2, seed);
    const Verdict v = certify_real_exact(e);
    REQUIRE(v.outcome == Outcome::NotRetrievable);
    require_uv_sound(e, v);
    CHECK(jacobian_rank_deficit(e, v.uv->v) >= 1);
  }
}

TEST_CASE("falsifier on zero shifts") {
  MeasurementEnsemble e = sample_generic(ScalarField::Complex, 8, 2, 11);
  e.shifts.setZero();
  const Verdict v = falsify_complex(e);
  REQUIRE(v.outcome == Outcome::NotRetrievable);
  CHECK(v.stats.restarts_tried <= 1);
  require_sound(e, *v.witness);
  require_uv_sound(e, v);
}

TEST_CASE("falsifier below 3d finds a collision") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto e = sample_generic(ScalarField::Complex, 8, 3, seed);
    FalsifyConfig cfg;
    cfg.seed = seed;
    const Verdict v = falsify_complex(e, cfg);
    REQUIRE(v.outcome == Outcome::NotRetrievable);
    require_sound(e, *v.witness);
    require_sound(e, witness_subminimal_complex(e));
  }
}

TEST_CASE("falsifier finds nothing on the structured complex family") {
  const Eigen::MatrixXcd b = Eigen::MatrixXcd::Identity(3, 3);
  const ShiftTripleSpec spec{{{cdouble(0), cdouble(1), cdouble(0, 1)},
                              {cdouble(0, 1), cdouble(0), cdouble(1)},
                              {cdouble(1), cdouble(0, 1), cdouble(0)}}};
  const auto e = build_complex_minimal(b, spec);
  FalsifyConfig cfg;
  cfg.restarts = 50;
  const Verdict v = falsify_complex(e, cfg);
  CHECK(v.outcome == Outcome::Inconclusive);
  CHECK(v.stats.best_residual > cfg.residual_relative * e.energy_scale());
  CHECK(v.stats.restarts_tried == 50);
}

TEST_CASE("structured certificates") {
  const ShiftTripleSpec good{{{cdouble(0), cdouble(1), cdouble(0, 1)}, {cdouble(0), cdouble(1), cdouble(0, 1)}}};
  const auto e = build_complex_minimal(Eigen::MatrixXcd::Identity(2, 2), good);
  const Verdict v = certify_structured(e);
  CHECK(v.outcome == Outcome::Retrievable);
  CHECK(v.certificate == Certificate::StructuredConstruction);

  MeasurementEnsemble bad = e;
  bad.shifts(1 + 2 * 2) = cdouble(2.0);  // second coordinate triple becomes (0, 1, 2)
  const Verdict w = certify_structured(bad);
  CHECK(w.outcome == Outcome::Inconclusive);
  CHECK(w.stats.note.rfind("pattern not matched", 0) == 0);

  CHECK(certify_structured(sample_generic(ScalarField::Complex, 6, 2, 1)).outcome == Outcome::Inconclusive);
  CHECK(certify_structured(stacked_identity()).outcome == Outcome::Retrievable);
  CHECK(collinearity_margin(0, 1, 2) == 0.0);
  CHECK(collinearity_margin(0, 1, cdouble(0, 1)) == 1.0);
}

TEST_CASE("brute-force oracle") {
  MeasurementEnsemble zero = sample_generic(ScalarField::Real, 4, 2, 5);
  zero.shifts.setZero();
  const auto w0 = brute_force_collision_search(zero);
  REQUIRE(w0);
  require_sound(zero, *w0);

  const auto p = perturb_real(stacked_identity(), 0.1);
  CollisionSearchConfig wide;
  wide.radius = 12.0;
  wide.step = 0.25;
  const auto wp = brute_force_collision_search(p.perturbed, wide);
  REQUIRE(wp);
  require_sound(p.perturbed, *wp);

  CHECK(!brute_force_collision_search(stacked_identity()));
}

TEST_CASE("exact certifier agrees with the oracle") {
  int collisions = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(seed % 3);
    const Eigen::Index m = std::min<Eigen::Index>(6, d + static_cast<Eigen::Index>(seed % 4));
    const auto e = sample_generic(ScalarField::Real, m, d, seed);
    const Verdict v = certify_real_exact(e);
    if (v.outcome == Outcome::NotRetrievable) {
      require_sound(e, *v.witness);
      require_uv_sound(e, v);
    } else {
      REQUIRE(v.outcome == Outcome::Retrievable);
    }
    CollisionSearchConfig cfg;
    cfg.seed = seed;
    if (d == 3) {
      cfg.mode = CollisionSearchConfig::Mode::Random;
      cfg.samples = 100;
    }
    if (const auto w = brute_force_collision_search(e, cfg)) {
      ++collisions;
      require_sound(e, *w);
      REQUIRE(v.outcome == Outcome::NotRetrievable);
    }
  }
  CHECK(collisions > 0);
}

TEST_CASE("adding a measurement keeps a retrievable ensemble retrievable") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(seed % 3);
    const auto e = sample_generic(ScalarField::Real, 2 * d, d, seed);
    if (certify_real_exact(e).outcome != Outcome::Retrievable) continue;
    const auto extra = sample_generic(ScalarField::Real, 2 * d + 1, d, seed + 10'000);
    MeasurementEnsemble grown = e;
    grown.rows.conservativeResize(2 * d + 1, d);
    grown.shifts.conservativeResize(2 * d + 1);
    grown.rows.row(2 * d) = extra.rows.row(2 * d);
    grown.shifts(2 * d) = extra.shifts(2 * d);
    REQUIRE(certify_real_exact(grown).outcome == Outcome::Retrievable);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("options: subset lemma and rational arithmetic") {
  CertifyOptions lemma;
  lemma.check_subset_lemma = true;
  CertifyOptions exact;
  exact.exact_rational = true;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(seed % 2);
    const auto e = sample_generic(ScalarField::Real, 2 * d - 1 + static_cast<Eigen::Index>(seed % 2), d, seed);
    const Outcome plain = certify_real_exact(e).outcome;
    CHECK_NOTHROW(certify_real_exact(e, {}, lemma));
    CHECK(certify_real_exact(e, {}, exact).outcome == plain);
  }
  // Exactly rank-deficient data where rounding is not an issue.
  Eigen::MatrixXd a(3, 2);
  a << 1, 2, 2, 4, 3, 6;
  const auto e = MeasurementEnsemble::real(a, Eigen::Vector3d(1, 5, 2));
  const Verdict v = certify_real_exact(e, {}, exact);
  REQUIRE(v.outcome == Outcome::NotRetrievable);
  require_sound(e, *v.witness);
}

TEST_CASE("certifier errors") {
  CertifyOptions small;
  small.enumeration_cap = 4;
  try {
    certify_real_exact(sample_generic(ScalarField::Real, 5, 2, 0), {}, small);
    FAIL("expected the enumeration cap to trigger");
  } catch (const DomainError& e) {
    CHECK(e.code() == "enumeration_cap");
  }
  CHECK_THROWS_AS(certify_real_exact(sample_generic(ScalarField::Complex, 5, 2, 0)), DomainError);
  CHECK_THROWS_AS(falsify_complex(stacked_identity()), DomainError);
}

}
