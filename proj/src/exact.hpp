// Exact rational linear algebra for re-verifying rank decisions of real
// ensembles. Matrices are small (m <= 24), so plain Gaussian elimination on
// boost::multiprecision rationals is fast enough.
#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <vector>

namespace affpr::exact {

using Rational = boost::multiprecision::cpp_rational;
using RMatrix = std::vector<std::vector<Rational>>;
using RVector = std::vector<Rational>;

/// Small-denominator rational that rounds back to exactly `v` when one exists
/// (denominator up to 10^6), otherwise the exact binary value of `v`.
Rational to_rational(double v);

RMatrix to_rational(const Eigen::MatrixXd& m);
double to_double(const Rational& r);

std::size_t rank(RMatrix m);

/// Some solution of a x = rhs, or nullopt when the system is inconsistent.
std::optional<RVector> solve(const RMatrix& a, const RVector& rhs, std::size_t cols);

/// A nonzero vector of the null space of `a` (cols columns), or nullopt when
/// the null space is trivial.
std::optional<RVector> null_vector(const RMatrix& a, std::size_t cols);

}  // namespace affpr::exact
