#pragma once

#include "affpr/certify.hpp"
#include "affpr/core.hpp"
#include "affpr/random.hpp"

#include <doctest.h>

namespace affpr::testing {

inline Signal random_signal(ScalarField field, Eigen::Index d, std::uint64_t seed) {
  GaussianStream rng(seed);
  return field == ScalarField::Real ? Signal::real(rng.normal_vector(d)) : Signal::complex(rng.complex_vector(d));
}

inline MeasurementEnsemble d1_pair() {
  return MeasurementEnsemble::real(Eigen::MatrixXd::Ones(2, 1), Eigen::Vector2d(0.0, 1.0));
}

/// The witness invariant every NotRetrievable result must satisfy.
inline void require_sound(const MeasurementEnsemble& e, const WitnessPair& w) {
  const WitnessCheck c = check_witness(e, w);
  INFO("mismatch " << c.mismatch << " allowed " << c.allowed << " separation " << c.separation);
  REQUIRE(c.ok);
}

}  // namespace affpr::testing
