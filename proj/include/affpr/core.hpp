// Shared substrate: measurement ensembles (A, b), signals, magnitude maps and
// the (d+1)-dimensional lifting that turns affine measurements into
// homogeneous ones.
//
// Convention: a stored row is the linear functional itself. Measurement j is
//   |sum_i rows(j, i) * x(i) + shifts(j)|
// with no conjugation anywhere. Real-tagged data is stored in the same complex
// containers with identically zero imaginary parts.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace affpr {

using cdouble = std::complex<double>;

enum class ScalarField { Real, Complex };

std::string to_string(ScalarField field);
ScalarField parse_field(const std::string& name);

/// Mathematically meaningful rejection of an input (dimension mismatch, a
/// violated precondition, an uncertifiable request). The code is a short
/// machine-readable tag.
class DomainError : public std::runtime_error {
 public:
  DomainError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Malformed external data (JSON shape, unreadable files).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Signal {
  ScalarField field = ScalarField::Real;
  Eigen::VectorXcd entries;

  Signal() = default;
  Signal(ScalarField f, Eigen::VectorXcd x) : field(f), entries(std::move(x)) {}

  static Signal real(const Eigen::VectorXd& x) {
    return Signal(ScalarField::Real, x.cast<cdouble>());
  }
  static Signal complex(Eigen::VectorXcd x) {
    return Signal(ScalarField::Complex, std::move(x));
  }
  static Signal zero(ScalarField f, Eigen::Index d) {
    return Signal(f, Eigen::VectorXcd::Zero(d));
  }

  Eigen::Index dim() const { return entries.size(); }
  double norm() const { return entries.norm(); }
  /// Real parts; only meaningful for real-tagged signals.
  Eigen::VectorXd real_part() const { return entries.real(); }
};

struct MagnitudeVector {
  Eigen::VectorXd values;
  Eigen::Index size() const { return values.size(); }
};

struct MeasurementEnsemble {
  ScalarField field = ScalarField::Real;
  Eigen::MatrixXcd rows;   // m x d
  Eigen::VectorXcd shifts; // m

  MeasurementEnsemble() = default;
  MeasurementEnsemble(ScalarField f, Eigen::MatrixXcd a, Eigen::VectorXcd b)
      : field(f), rows(std::move(a)), shifts(std::move(b)) {}

  static MeasurementEnsemble real(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    return {ScalarField::Real, a.cast<cdouble>(), b.cast<cdouble>()};
  }
  static MeasurementEnsemble complex(Eigen::MatrixXcd a, Eigen::VectorXcd b) {
    return {ScalarField::Complex, std::move(a), std::move(b)};
  }

  Eigen::Index m() const { return rows.rows(); }
  Eigen::Index d() const { return rows.cols(); }

  Eigen::MatrixXd real_rows() const { return rows.real(); }
  Eigen::VectorXd real_shifts() const { return shifts.real(); }

  /// Scale used by scale-aware thresholds: 1 + ||b||^2 + ||A||_F^2.
  double energy_scale() const {
    return 1.0 + shifts.squaredNorm() + rows.squaredNorm();
  }
};

/// Row j is (a_j, b_j): an m x (d+1) classical ensemble acting on (x, 1).
struct LiftedEnsemble {
  ScalarField field = ScalarField::Real;
  Eigen::MatrixXcd rows;
};

struct Violation {
  std::string field;
  std::string message;
};

std::vector<Violation> validate_ensemble(const MeasurementEnsemble& e);
std::vector<Violation> validate_signal(const Signal& x);

/// Throws DomainError when the ensemble is malformed.
void require_valid(const MeasurementEnsemble& e);
/// Throws DomainError on field or dimension mismatch.
void require_compatible(const MeasurementEnsemble& e, const Signal& x);

/// Affine values r_j . x + b_j, unchecked. Summation runs left to right over
/// the columns and adds the shift last, so the lifted evaluation reproduces it
/// bit for bit.
Eigen::VectorXcd affine_values(const MeasurementEnsemble& e, const Eigen::VectorXcd& x);

MagnitudeVector measure(const MeasurementEnsemble& e, const Signal& x);
Eigen::VectorXd measure_sq(const MeasurementEnsemble& e, const Signal& x);

LiftedEnsemble lift(const MeasurementEnsemble& e);
Signal lift_signal(const Signal& x);
/// Classical shift-free magnitudes |<row_j, x>| of a lifted ensemble.
MagnitudeVector classical_measure(const LiftedEnsemble& l, const Signal& x);

/// Real coordinates of a signal: x itself for the real field, (Re x, Im x)
/// stacked for the complex field.
Eigen::VectorXd to_real_coords(const Signal& x);
Signal from_real_coords(ScalarField field, const Eigen::VectorXd& coords);
Eigen::Index real_dim(ScalarField field, Eigen::Index d);

bool all_finite(const MeasurementEnsemble& e);

}  // namespace affpr
