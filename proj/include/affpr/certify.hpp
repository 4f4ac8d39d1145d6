// Injectivity certification for affine magnitude maps.
//
// Real field: an exact decision by subset enumeration. The ensemble fails iff
// some subset S has b_S in the column span of A_S while the rows outside S
// do not span R^d; the failing subset yields an explicit collision.
//
// Complex field: no finite certificate is known, so certification is a
// semi-decision. The falsifier searches for a nonzero u and a v with
//   Re(conj(r_k . u) (r_k . v + b_k)) = 0   for every k,
// which is exactly a collision x = v + u, y = v - u.
#pragma once

#include "affpr/core.hpp"
#include "affpr/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace affpr {

enum class Outcome { Retrievable, NotRetrievable, Inconclusive };
enum class Certificate { None, ExactSubsetCheck, StructuredConstruction };

std::string to_string(Outcome o);
std::string to_string(Certificate c);

struct WitnessPair {
  Signal x;
  Signal y;
};

/// Condition-(C) pair; the collision is x = v + u, y = v - u.
struct UVWitness {
  Signal u;
  Signal v;
};

UVWitness to_uv(const WitnessPair& w);
WitnessPair to_pair(const UVWitness& uv);

struct WitnessTolerance {
  double relative_mismatch = 1e-9;  // against 1 + ||M(x)||_inf
  double min_separation = 1e-6;
};

struct WitnessCheck {
  double mismatch = 0.0;    // ||M(x) - M(y)||_inf
  double allowed = 0.0;
  double separation = 0.0;  // ||x - y||
  bool ok = false;
};

WitnessCheck check_witness(const MeasurementEnsemble& e, const WitnessPair& w,
                           const WitnessTolerance& tol = {});

struct SearchStats {
  int restarts_tried = 0;
  double best_residual = 0.0;
  std::uint64_t subsets_checked = 0;
  std::string note;
};

struct Verdict {
  Outcome outcome = Outcome::Inconclusive;
  Certificate certificate = Certificate::None;
  std::optional<WitnessPair> witness;
  std::optional<UVWitness> uv;
  /// Indices of the failing subset S (real exact certifier only).
  std::vector<Eigen::Index> failing_subset;
  SearchStats stats;
};

struct CertifyOptions {
  int enumeration_cap = 24;
  /// Re-run every rank decision in exact rational arithmetic.
  bool exact_rational = false;
  /// Assert the subset lemma on the failing subset (all S' of S also pass the
  /// span test).
  bool check_subset_lemma = false;
};

Verdict certify_real_exact(const MeasurementEnsemble& e, const RankTolerance& tol = {},
                           const CertifyOptions& opts = {});

/// Entry k: (r_k.u)(r_k.v + b_k) for the real field, Re(conj(r_k.u)(r_k.v + b_k))
/// for the complex field.
Eigen::VectorXd violates_condition_c(const MeasurementEnsemble& e, const Signal& u, const Signal& v);

/// Real field: d x m, column j = (r_j.x + b_j) r_j. Complex field: the m x 2d
/// real Jacobian of measure_sq in (Re x, Im x) coordinates, factor 2 included.
Eigen::MatrixXd jacobian(const MeasurementEnsemble& e, const Signal& x);

/// m x n_real Jacobian of measure_sq in real coordinates for either field
/// (2 J^T for the real field, J for the complex field).
Eigen::MatrixXd measure_sq_jacobian(const MeasurementEnsemble& e, const Signal& x);

/// d - rank (real) or 2d - rank (complex) of the Jacobian at x.
Eigen::Index jacobian_rank_deficit(const MeasurementEnsemble& e, const Signal& x,
                                   const RankTolerance& tol = {});

struct FalsifyConfig {
  int restarts = 32;
  int iterations = 500;
  /// Acceptance threshold on sum_k residual_k^2 relative to
  /// 1 + ||b||^2 + ||A||_F^2.
  double residual_relative = 1e-10;
  std::uint64_t seed = 0;
};

Verdict falsify_complex(const MeasurementEnsemble& e, const FalsifyConfig& cfg = {});

/// Retrievable(StructuredConstruction) for the stacked (B,B)^T real and
/// (B,B,B)^T complex families; Inconclusive otherwise.
Verdict certify_structured(const MeasurementEnsemble& e, const RankTolerance& tol = {});

struct StructuredPattern {
  Eigen::MatrixXcd block;  // d x d functional block
  int copies = 0;          // 2 (real) or 3 (complex)
};
/// Detects the stacked pattern and returns the common block, without checking
/// the shift conditions.
std::optional<StructuredPattern> detect_stacked_blocks(const MeasurementEnsemble& e, int copies);

/// Twice the area of the triangle (b1, b2, b3).
double collinearity_margin(cdouble b1, cdouble b2, cdouble b3);

struct CollisionSearchConfig {
  enum class Mode { Grid, Random } mode = Mode::Grid;
  double radius = 3.0;
  double step = 0.05;           // grid mode
  int samples = 2000;           // random mode: number of refined starts
  int max_candidates = 200;     // grid mode: refined near-collisions
  std::uint64_t seed = 0;
};

std::optional<WitnessPair> brute_force_collision_search(const MeasurementEnsemble& e,
                                                        const CollisionSearchConfig& cfg = {});

namespace detail {

/// Real-coordinate form of the ensemble: every measurement k owns `width`
/// consecutive rows of `forms` (1 for real, 2 for complex: the real and
/// imaginary part of r_k . x) and the matching entries of `offsets`.
struct RealForms {
  Eigen::MatrixXd forms;
  Eigen::VectorXd offsets;
  Eigen::Index width = 1;
  Eigen::Index m = 0;
  Eigen::Index n = 0;  // real dimension
};

RealForms real_forms(const MeasurementEnsemble& e);

/// Condition-(C) residuals for u = pu * theta, v = pv * theta.
Eigen::VectorXd uv_residuals(const RealForms& f, const Eigen::VectorXd& ut, const Eigen::VectorXd& vt);

struct PolishResult {
  Eigen::VectorXd theta;
  double residual = 0.0;  // ||rho||_2 at the end
};

/// Damped Gauss-Newton (minimum-norm steps) on rho(theta) = 0 subject to
/// ||pu theta|| = u_norm.
PolishResult polish_uv(const RealForms& f, const Eigen::MatrixXd& pu, const Eigen::MatrixXd& pv,
                       Eigen::VectorXd theta, double u_norm, int iterations = 60);

}  // namespace detail

}  // namespace affpr
