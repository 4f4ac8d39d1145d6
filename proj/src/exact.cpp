#include "exact.hpp"

#include <cmath>

namespace affpr::exact {

namespace {

using boost::multiprecision::cpp_int;

Rational dyadic(double v) {
  int exp = 0;
  const double mant = std::frexp(v, &exp);
  // mant * 2^53 is an integer for every finite double.
  const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
  Rational r(scaled);
  exp -= 53;
  if (exp >= 0) {
    r *= Rational(cpp_int(1) << exp);
  } else {
    r /= Rational(cpp_int(1) << (-exp));
  }
  return r;
}

/// Row echelon form in place; returns pivot columns.
std::vector<std::size_t> eliminate(RMatrix& m, std::size_t cols) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < m.size(); ++c) {
    std::size_t p = row;
    while (p < m.size() && m[p][c] == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[row]);
    const Rational inv = Rational(1) / m[row][c];
    for (std::size_t k = c; k < m[row].size(); ++k) m[row][k] *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || m[r][c] == 0) continue;
      const Rational f = m[r][c];
      for (std::size_t k = c; k < m[r].size(); ++k) m[r][k] -= f * m[row][k];
    }
    pivots.push_back(c);
    ++row;
  }
  return pivots;
}

}  // namespace

Rational to_rational(double v) {
  if (v == 0.0) return Rational(0);
  // Continued-fraction convergents of |v|.
  const double a = std::fabs(v);
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double x = a;
  for (int it = 0; it < 40; ++it) {
    const double fl = std::floor(x);
    if (fl > 1e15) break;
    const auto q = static_cast<long long>(fl);
    const long long h2 = q * h1 + h0;
    const long long k2 = q * k1 + k0;
    if (k2 > 1000000) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    if (static_cast<double>(h1) / static_cast<double>(k1) == a) {
      Rational r(h1, k1);
      return v < 0 ? Rational(-r) : r;
    }
    const double frac = x - fl;
    if (frac == 0.0) break;
    x = 1.0 / frac;
  }
  return dyadic(v);
}

RMatrix to_rational(const Eigen::MatrixXd& m) {
  RMatrix out(static_cast<std::size_t>(m.rows()), RVector(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = to_rational(m(i, j));
  return out;
}

double to_double(const Rational& r) { return static_cast<double>(r); }

std::size_t rank(RMatrix m) {
  if (m.empty()) return 0;
  return eliminate(m, m.front().size()).size();
}

std::optional<RVector> solve(const RMatrix& a, const RVector& rhs, std::size_t cols) {
  RMatrix aug = a;
  for (std::size_t i = 0; i < aug.size(); ++i) aug[i].push_back(rhs[i]);
  auto pivots = eliminate(aug, cols + 1);
  if (!pivots.empty() && pivots.back() == cols) return std::nullopt;
  RVector x(cols, Rational(0));
  for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug[r][cols];
  return x;
}

std::optional<RVector> null_vector(const RMatrix& a, std::size_t cols) {
  RMatrix m = a;
  auto pivots = eliminate(m, cols);
  std::vector<bool> is_pivot(cols, false);
  for (auto p : pivots) is_pivot[p] = true;
  std::size_t free_col = cols;
  for (std::size_t c = 0; c < cols; ++c) {
    if (!is_pivot[c]) {
      free_col = c;
      break;
    }
  }
  if (free_col == cols) return std::nullopt;
  RVector x(cols, Rational(0));
  x[free_col] = 1;
  for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = -m[r][free_col];
  return x;
}

}  // namespace affpr::exact
