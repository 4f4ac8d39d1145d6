#include "affpr/construct.hpp"

#include "affpr/linalg.hpp"
#include "affpr/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace affpr {

namespace {

const cdouble kI{0.0, 1.0};

WitnessPair self_checked(const MeasurementEnsemble& e, WitnessPair w, const char* who) {
  const auto c = check_witness(e, w);
  if (!c.ok) {
    std::ostringstream os;
    os << who << ": constructed witness failed verification (mismatch " << c.mismatch
       << ", separation " << c.separation << ")";
    throw std::logic_error(os.str());
  }
  return w;
}

}  // namespace

std::vector<double> ShiftTripleSpec::margins() const {
  std::vector<double> out;
  out.reserve(triples.size());
  for (const auto& t : triples) out.push_back(collinearity_margin(t[0], t[1], t[2]));
  return out;
}

MeasurementEnsemble build_real_minimal(Eigen::Index d, const ShiftPairSpec& spec) {
  if (d < 1) throw DomainError("bad_dimension", "d must be at least 1");
  if (static_cast<Eigen::Index>(spec.pairs.size()) != d) {
    throw DomainError("spec_length", "expected " + std::to_string(d) + " shift pairs");
  }
  Eigen::MatrixXd a(2 * d, d);
  a << Eigen::MatrixXd::Identity(d, d), Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b(2 * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto [b1, b2] = spec.pairs[static_cast<std::size_t>(j)];
    if (b1 == b2) {
      throw DomainError("equal_shift_pair", "equal shift pair at coordinate " + std::to_string(j));
    }
    b(j) = b1;
    b(d + j) = b2;
  }
  return MeasurementEnsemble::real(a, b);
}

MeasurementEnsemble build_complex_minimal(const Eigen::MatrixXcd& b, const ShiftTripleSpec& spec,
                                          const RankTolerance& tol) {
  const Eigen::Index d = b.rows();
  if (d < 1 || b.cols() != d) throw DomainError("bad_block", "B must be a nonempty square matrix");
  if (static_cast<Eigen::Index>(spec.triples.size()) != d) {
    throw DomainError("spec_length", "expected " + std::to_string(d) + " shift triples");
  }
  if (relative_rank(b, tol) < d) throw DomainError("singular_block", "B is singular at the rank tolerance");
  const auto margins = spec.margins();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(margins[static_cast<std::size_t>(j)] > 0.0)) {
      std::ostringstream os;
      os << "collinear triple at coordinate " << j << " (margin " << margins[static_cast<std::size_t>(j)] << ")";
      throw DomainError("collinear_triple", os.str());
    }
  }
  const Eigen::MatrixXcd block = b.transpose();
  Eigen::MatrixXcd a(3 * d, d);
  a << block, block, block;
  Eigen::VectorXcd shifts(3 * d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = 0; k < 3; ++k)
      shifts(k * d + j) = spec.triples[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
  return MeasurementEnsemble::complex(a, shifts);
}

MeasurementEnsemble sample_generic(ScalarField field, Eigen::Index m, Eigen::Index d, std::uint64_t seed) {
  if (m < 1 || d < 1) throw DomainError("bad_dimension", "m and d must be at least 1");
  const std::uint64_t tag = field == ScalarField::Real ? 1 : 2;
  Eigen::MatrixXcd a(m, d);
  Eigen::VectorXcd b(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    GaussianStream rng(derive_seed(seed, {tag, static_cast<std::uint64_t>(j)}));
    for (Eigen::Index i = 0; i < d; ++i) a(j, i) = field == ScalarField::Real ? cdouble(rng.normal()) : rng.complex_normal();
    b(j) = field == ScalarField::Real ? cdouble(rng.normal()) : rng.complex_normal();
  }
  return {field, a, b};
}

ShiftPairSpec default_perturbation_pairs(Eigen::Index d) {
  ShiftPairSpec s;
  for (Eigen::Index j = 1; j <= d; ++j) {
    const auto jd = static_cast<double>(j);
    s.pairs.emplace_back(jd, j == 1 ? 0.0 : jd + 1.0);
  }
  return s;
}

MeasurementEnsemble default_perturbation_base_complex(Eigen::Index d) {
  ShiftTripleSpec s;
  for (Eigen::Index j = 0; j < d; ++j) s.triples.push_back({kI, cdouble(0.0), cdouble(1.0)});
  return build_complex_minimal(Eigen::MatrixXcd::Identity(d, d), s);
}

namespace {

bool is_identity_stack(const MeasurementEnsemble& e, int copies) {
  const Eigen::Index d = e.d();
  if (e.m() != copies * d) return false;
  for (int c = 0; c < copies; ++c) {
    if (e.rows.middleRows(c * d, d) != Eigen::MatrixXcd::Identity(d, d)) return false;
  }
  return true;
}

}  // namespace

PerturbationReport perturb_real(const MeasurementEnsemble& e, double delta) {
  require_valid(e);
  if (e.field != ScalarField::Real) throw DomainError("field_mismatch", "perturb_real requires a real ensemble");
  const Eigen::Index d = e.d();
  if (d < 2) throw DomainError("precondition_d", "perturb_real requires d >= 2");
  if (!is_identity_stack(e, 2)) throw DomainError("precondition_pattern", "ensemble is not (I_d, I_d)^T");
  for (Eigen::Index j = 0; j < d; ++j) {
    if (e.shifts(j) == e.shifts(d + j)) {
      throw DomainError("precondition_pairs", "equal shift pair at coordinate " + std::to_string(j));
    }
  }
  const double b11 = e.shifts(0).real();
  if (e.shifts(d).real() != 0.0) throw DomainError("precondition_b12", "perturb_real requires b_12 = 0");
  if (b11 == 0.0) throw DomainError("precondition_b11", "perturb_real requires b_11 != 0");
  if (!(delta > 0.0)) throw DomainError("precondition_delta", "delta must be positive");

  PerturbationReport r;
  r.original = e;
  r.delta = delta;
  r.perturbed = e;
  // (I + b11 delta E_21)^T puts the entry at functional position (1, 2).
  r.perturbed.rows(0, 1) += b11 * delta;
  r.frobenius_distance = (r.perturbed.rows - e.rows).norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
  x(0) = b11;
  y(0) = -b11;
  x(1) = y(1) = -1.0 / delta;
  r.witness = self_checked(r.perturbed, {Signal::real(x), Signal::real(y)}, "perturb_real");
  return r;
}

PerturbationReport perturb_complex(const MeasurementEnsemble& e, double delta) {
  require_valid(e);
  if (e.field != ScalarField::Complex) {
    throw DomainError("field_mismatch", "perturb_complex requires a complex ensemble");
  }
  const Eigen::Index d = e.d();
  if (d < 2) throw DomainError("precondition_d", "perturb_complex requires d >= 2");
  if (!is_identity_stack(e, 3)) throw DomainError("precondition_pattern", "ensemble is not (I_d, I_d, I_d)^T");
  for (Eigen::Index j = 0; j < d; ++j) {
    if (e.shifts(j) != kI || e.shifts(d + j) != 0.0 || e.shifts(2 * d + j) != 1.0) {
      throw DomainError("precondition_pattern", "shifts must be (i,...,i, 0,...,0, 1,...,1)");
    }
  }
  if (!(delta > 0.0)) throw DomainError("precondition_delta", "delta must be positive");

  PerturbationReport r;
  r.original = e;
  r.delta = delta;
  r.perturbed = e;
  r.perturbed.rows(0, 1) += kI * delta;
  r.frobenius_distance = (r.perturbed.rows - e.rows).norm();
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(d);
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(d);
  x(0) = kI;
  y(0) = -kI;
  x(1) = y(1) = -1.0 / delta;
  r.witness = self_checked(r.perturbed, {Signal::complex(x), Signal::complex(y)}, "perturb_complex");
  return r;
}

WitnessPair witness_subminimal_real(const MeasurementEnsemble& e, const RankTolerance& tol) {
  require_valid(e);
  if (e.field != ScalarField::Real) throw DomainError("field_mismatch", "witness_subminimal_real requires a real ensemble");
  const Eigen::Index m = e.m(), d = e.d();
  if (m > 2 * d - 1) throw DomainError("precondition_m", "witness_subminimal_real requires m <= 2d - 1");
  const Eigen::MatrixXd a = e.real_rows();
  const Eigen::VectorXd b = e.real_shifts();

  if (relative_rank(a, tol) < d) {
    const double thr = a.isZero(0.0) ? 0.0 : tol.absolute(spectral_norm(a), m, d);
    Eigen::VectorXd u = null_space(a, thr).col(0);
    u.normalize();
    return self_checked(e, {Signal::zero(ScalarField::Real, d), Signal::real(u)}, "witness_subminimal_real");
  }
  const auto s0 = pivot_rows(a, d);
  std::vector<Eigen::Index> rest;
  for (Eigen::Index j = 0; j < m; ++j)
    if (std::find(s0.begin(), s0.end(), j) == s0.end()) rest.push_back(j);
  Eigen::VectorXd bs(d);
  for (Eigen::Index k = 0; k < d; ++k) bs(k) = -b(s0[static_cast<std::size_t>(k)]);
  const Eigen::VectorXd v = select_rows(a, s0).colPivHouseholderQr().solve(bs);
  Eigen::VectorXd u = least_singular_vector(select_rows(a, rest));
  u.normalize();
  return self_checked(e, {Signal::real(v + u), Signal::real(v - u)}, "witness_subminimal_real");
}

WitnessPair witness_subminimal_complex(const MeasurementEnsemble& e, const RankTolerance& tol) {
  require_valid(e);
  if (e.field != ScalarField::Complex) {
    throw DomainError("field_mismatch", "witness_subminimal_complex requires a complex ensemble");
  }
  const Eigen::Index m = e.m(), d = e.d();
  if (m > 3 * d - 1) throw DomainError("precondition_m", "witness_subminimal_complex requires m <= 3d - 1");

  if (relative_rank(e.rows, tol) < d) {
    const double thr = e.rows.isZero(0.0) ? 0.0 : tol.absolute(spectral_norm(e.rows), m, d);
    Eigen::VectorXcd u = null_space(e.rows, thr).col(0);
    u.normalize();
    return self_checked(e, {Signal::zero(ScalarField::Complex, d), Signal::complex(u)},
                        "witness_subminimal_complex");
  }
  const auto t = pivot_rows(e.rows, d);
  std::vector<Eigen::Index> rest;
  for (Eigen::Index j = 0; j < m; ++j)
    if (std::find(t.begin(), t.end(), j) == t.end()) rest.push_back(j);
  Eigen::VectorXcd bt(d);
  for (Eigen::Index k = 0; k < d; ++k) bt(k) = -e.shifts(t[static_cast<std::size_t>(k)]);
  const Eigen::VectorXcd v = select_rows(e.rows, t).colPivHouseholderQr().solve(bt);

  // Re(conj(r_j . u) (r_j . v + b_j)) = 0 for j outside T: m - d < 2d real
  // homogeneous equations in (Re u, Im u).
  const Eigen::VectorXcd w = affine_values(e, v);
  Eigen::MatrixXd h(static_cast<Eigen::Index>(rest.size()), 2 * d);
  for (std::size_t k = 0; k < rest.size(); ++k) {
    const Eigen::Index j = rest[k];
    const Eigen::RowVectorXd rr = e.rows.row(j).real();
    const Eigen::RowVectorXd ri = e.rows.row(j).imag();
    const double wr = w(j).real(), wi = w(j).imag();
    h.row(static_cast<Eigen::Index>(k)) << wr * rr + wi * ri, wi * rr - wr * ri;
  }
  Eigen::VectorXd ut = least_singular_vector(h);
  ut.normalize();
  const Signal u = from_real_coords(ScalarField::Complex, ut);
  return self_checked(e, {Signal::complex(v + u.entries), Signal::complex(v - u.entries)},
                      "witness_subminimal_complex");
}

}  // namespace affpr
