// Seeded batch experiments over grids of (d, m, s) cells.
//
// Each trial samples its ensemble from derive_seed(master, {d, m, s, trial}),
// so a trial's result does not depend on which other cells run or in which
// order. Rows come back in (d, m, s, trial) order regardless of --jobs.
#pragma once

#include "affpr/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace affpr {

enum class ExperimentKind { PhaseTransition, SparseTransition, StabilitySweep, CounterexampleDemo };

std::string to_string(ExperimentKind k);
/// Accepts the CLI spellings: phase-transition, sparse-transition,
/// stability-sweep, counterexample-demo.
ExperimentKind parse_experiment_kind(const std::string& name);

struct IndexRange {
  Eigen::Index lo = 0;
  Eigen::Index hi = 0;
  /// "5" or "4..8", both ends inclusive.
  static IndexRange parse(const std::string& text);
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::PhaseTransition;
  ScalarField field = ScalarField::Real;
  IndexRange d{2, 2};
  IndexRange m{4, 4};
  IndexRange s{0, 0};
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out_path;  // CSV; empty means no file
  int jobs = 1;
  int restarts = 32;     // falsifier restarts
  double radius = 5.0;   // stability sweep ball
  std::int64_t pairs = 1000;
  double work_budget = 1e12;
  bool timing = false;   // add a wall-time column (breaks byte identity)
};

struct ExperimentRow {
  Eigen::Index d = 0, m = 0, s = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string outcome;
  /// Kind-specific number (c2_hat, witness mismatch, ...); NaN when unused.
  double metric = 0.0;
  double wall_seconds = 0.0;
};

/// Throws DomainError on a malformed spec or when the estimated work exceeds
/// the budget.
void validate_experiment(const ExperimentSpec& spec);

std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec);

/// "# affpr-experiment-csv v1" comment line, column header, then rows.
std::string format_csv(const ExperimentSpec& spec, const std::vector<ExperimentRow>& rows);

/// One line per cell: counts and fractions of each outcome.
std::string summarize(const std::vector<ExperimentRow>& rows);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace affpr
