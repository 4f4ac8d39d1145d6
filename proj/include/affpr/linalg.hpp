// Small dense linear-algebra helpers shared by the certifiers, constructors
// and solvers. Everything here works for real and complex scalars alike.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <vector>

namespace affpr {

/// Singular-value threshold for rank decisions. The absolute cut-off is
/// relative * sigma_max(reference) * max(rows, cols) where the reference is
/// the full lifted ensemble [A b], so every subset shares one threshold.
struct RankTolerance {
  double relative = 1e-10;

  double absolute(double sigma_max, Eigen::Index rows, Eigen::Index cols) const {
    return relative * sigma_max * static_cast<double>(std::max<Eigen::Index>(rows, cols));
  }
};

template <typename Derived>
Eigen::VectorXd singular_values(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0 || m.cols() == 0) return Eigen::VectorXd();
  using Plain = typename Derived::PlainObject;
  Eigen::JacobiSVD<Plain> svd(m.eval());
  return svd.singularValues();
}

template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  const Eigen::VectorXd s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

/// Number of singular values strictly above the absolute threshold.
template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& m, double threshold) {
  const Eigen::VectorXd s = singular_values(m);
  return static_cast<Eigen::Index>((s.array() > threshold).count());
}

/// Rank with the threshold taken relative to the matrix's own largest singular
/// value.
template <typename Derived>
Eigen::Index relative_rank(const Eigen::MatrixBase<Derived>& m, const RankTolerance& tol) {
  const Eigen::VectorXd s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double thr = tol.absolute(s(0), m.rows(), m.cols());
  return static_cast<Eigen::Index>((s.array() > thr).count());
}

/// Orthonormal basis (columns) of the numerical null space. A matrix with no
/// rows has the whole space as null space and yields the identity.
template <typename Derived>
typename Derived::PlainObject null_space(const Eigen::MatrixBase<Derived>& m, double threshold) {
  using Plain = typename Derived::PlainObject;
  const Eigen::Index n = m.cols();
  if (m.rows() == 0 || m.isZero(0.0)) return Plain::Identity(n, n);
  Eigen::JacobiSVD<Plain> svd(m.eval(), Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::Index rank = static_cast<Eigen::Index>((s.array() > threshold).count());
  return svd.matrixV().rightCols(n - rank);
}

/// Unit vector minimising ||m v||: the right singular vector of the smallest
/// singular value (or the first null-space basis vector when the matrix has
/// fewer rows than columns).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> least_singular_vector(
    const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  const Eigen::Index n = m.cols();
  if (m.rows() == 0 || m.isZero(0.0)) {
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> e =
        Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>::Zero(n);
    e(0) = 1.0;
    return e;
  }
  Eigen::JacobiSVD<Plain> svd(m.eval(), Eigen::ComputeFullV);
  const Eigen::Index k = std::min(m.rows(), n);
  // Columns k..n-1 of V span the structural null space; prefer the first.
  return k < n ? svd.matrixV().col(k) : svd.matrixV().col(n - 1);
}

/// Minimum-norm least-squares solution of a x = rhs.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1> min_norm_solve(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& rhs) {
  using Plain = typename DerivedA::PlainObject;
  if (a.rows() == 0) {
    return Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1>::Zero(a.cols());
  }
  Eigen::CompleteOrthogonalDecomposition<Plain> cod(a.eval());
  return cod.solve(rhs.eval());
}

/// Column-pivoted QR on the transpose: indices of `count` rows of `a` chosen
/// greedily by largest remaining pivot.
template <typename Derived>
std::vector<Eigen::Index> pivot_rows(const Eigen::MatrixBase<Derived>& a, Eigen::Index count) {
  using Plain = typename Derived::PlainObject;
  Plain at = a.adjoint();
  Eigen::ColPivHouseholderQR<Plain> qr(at);
  const auto& perm = qr.colsPermutation().indices();
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < count && i < perm.size(); ++i) out.push_back(perm(i));
  return out;
}

template <typename Derived>
typename Derived::PlainObject select_rows(const Eigen::MatrixBase<Derived>& a,
                                          const std::vector<Eigen::Index>& idx) {
  typename Derived::PlainObject out(static_cast<Eigen::Index>(idx.size()), a.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = a.row(idx[k]);
  return out;
}

/// Real 2x-sized representation of a complex matrix acting on (Re x, Im x):
/// [Re M, -Im M; Im M, Re M].
inline Eigen::MatrixXd realify(const Eigen::MatrixXcd& m) {
  const Eigen::Index r = m.rows(), c = m.cols();
  Eigen::MatrixXd out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = m.real();
  out.topRightCorner(r, c) = -m.imag();
  out.bottomLeftCorner(r, c) = m.imag();
  out.bottomRightCorner(r, c) = m.real();
  return out;
}

}  // namespace affpr
