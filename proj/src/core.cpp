#include "affpr/core.hpp"

#include <cmath>

namespace affpr {

std::string to_string(ScalarField field) {
  return field == ScalarField::Real ? "real" : "complex";
}

ScalarField parse_field(const std::string& name) {
  if (name == "real") return ScalarField::Real;
  if (name == "complex") return ScalarField::Complex;
  throw FormatError("unknown field '" + name + "' (expected real or complex)");
}

namespace {

bool has_imaginary(const Eigen::MatrixXcd& m) {
  return (m.imag().array() != 0.0).any();
}

}  // namespace

std::vector<Violation> validate_ensemble(const MeasurementEnsemble& e) {
  std::vector<Violation> out;
  if (e.rows.rows() < 1) out.push_back({"m", "at least one measurement is required"});
  if (e.rows.cols() < 1) out.push_back({"d", "ambient dimension must be at least 1"});
  if (e.shifts.size() != e.rows.rows()) {
    out.push_back({"shifts length", "expected " + std::to_string(e.rows.rows()) +
                                        " shifts, got " + std::to_string(e.shifts.size())});
  }
  if (e.field == ScalarField::Real && (has_imaginary(e.rows) || has_imaginary(e.shifts))) {
    out.push_back({"real tag", "real-tagged ensemble has a nonzero imaginary part"});
  }
  if (!all_finite(e)) out.push_back({"finite", "non-finite entry"});
  return out;
}

std::vector<Violation> validate_signal(const Signal& x) {
  std::vector<Violation> out;
  if (x.field == ScalarField::Real && has_imaginary(x.entries)) {
    out.push_back({"real tag", "real-tagged signal has a nonzero imaginary part"});
  }
  if (!x.entries.allFinite()) out.push_back({"finite", "non-finite entry"});
  return out;
}

void require_valid(const MeasurementEnsemble& e) {
  auto v = validate_ensemble(e);
  if (!v.empty()) throw DomainError("invalid_ensemble", v.front().field + ": " + v.front().message);
}

void require_compatible(const MeasurementEnsemble& e, const Signal& x) {
  if (e.field != x.field) {
    throw DomainError("field_mismatch", "ensemble is " + to_string(e.field) + " but signal is " +
                                            to_string(x.field));
  }
  if (x.dim() != e.d()) {
    throw DomainError("dimension_mismatch", "signal has dimension " + std::to_string(x.dim()) +
                                                ", ensemble expects " + std::to_string(e.d()));
  }
}

Eigen::VectorXcd affine_values(const MeasurementEnsemble& e, const Eigen::VectorXcd& x) {
  Eigen::VectorXcd z(e.m());
  for (Eigen::Index j = 0; j < e.m(); ++j) {
    cdouble acc = 0.0;
    for (Eigen::Index i = 0; i < e.d(); ++i) acc += e.rows(j, i) * x(i);
    z(j) = acc + e.shifts(j);
  }
  return z;
}

MagnitudeVector measure(const MeasurementEnsemble& e, const Signal& x) {
  require_compatible(e, x);
  const Eigen::VectorXcd z = affine_values(e, x.entries);
  return {z.cwiseAbs()};
}

Eigen::VectorXd measure_sq(const MeasurementEnsemble& e, const Signal& x) {
  require_compatible(e, x);
  const Eigen::VectorXcd z = affine_values(e, x.entries);
  return z.cwiseAbs2();
}

LiftedEnsemble lift(const MeasurementEnsemble& e) {
  LiftedEnsemble l;
  l.field = e.field;
  l.rows.resize(e.m(), e.d() + 1);
  l.rows.leftCols(e.d()) = e.rows;
  l.rows.col(e.d()) = e.shifts;
  return l;
}

Signal lift_signal(const Signal& x) {
  Eigen::VectorXcd t(x.dim() + 1);
  t.head(x.dim()) = x.entries;
  t(x.dim()) = 1.0;
  return {x.field, t};
}

MagnitudeVector classical_measure(const LiftedEnsemble& l, const Signal& x) {
  if (x.dim() != l.rows.cols() || x.field != l.field) {
    throw DomainError("dimension_mismatch", "lifted signal does not match lifted ensemble");
  }
  Eigen::VectorXcd z(l.rows.rows());
  for (Eigen::Index j = 0; j < l.rows.rows(); ++j) {
    cdouble acc = 0.0;
    for (Eigen::Index i = 0; i + 1 < l.rows.cols(); ++i) acc += l.rows(j, i) * x.entries(i);
    const Eigen::Index last = l.rows.cols() - 1;
    z(j) = acc + l.rows(j, last) * x.entries(last);
  }
  return {z.cwiseAbs()};
}

Eigen::Index real_dim(ScalarField field, Eigen::Index d) {
  return field == ScalarField::Real ? d : 2 * d;
}

Eigen::VectorXd to_real_coords(const Signal& x) {
  if (x.field == ScalarField::Real) return x.entries.real();
  Eigen::VectorXd out(2 * x.dim());
  out << x.entries.real(), x.entries.imag();
  return out;
}

Signal from_real_coords(ScalarField field, const Eigen::VectorXd& coords) {
  if (field == ScalarField::Real) return Signal::real(coords);
  const Eigen::Index d = coords.size() / 2;
  Eigen::VectorXcd x(d);
  for (Eigen::Index i = 0; i < d; ++i) x(i) = cdouble(coords(i), coords(d + i));
  return Signal::complex(x);
}

bool all_finite(const MeasurementEnsemble& e) {
  return e.rows.allFinite() && e.shifts.allFinite();
}

}  // namespace affpr
