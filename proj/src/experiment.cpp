#include "affpr/experiment.hpp"

#include "affpr/certify.hpp"
#include "affpr/construct.hpp"
#include "affpr/random.hpp"
#include "affpr/sparse.hpp"
#include "affpr/stability.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace affpr {

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::PhaseTransition: return "phase-transition";
    case ExperimentKind::SparseTransition: return "sparse-transition";
    case ExperimentKind::StabilitySweep: return "stability-sweep";
    case ExperimentKind::CounterexampleDemo: return "counterexample-demo";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::PhaseTransition, ExperimentKind::SparseTransition, ExperimentKind::StabilitySweep,
                 ExperimentKind::CounterexampleDemo}) {
    if (to_string(k) == name) return k;
  }
  throw FormatError("unknown experiment kind \"" + name + "\"");
}

IndexRange IndexRange::parse(const std::string& text) {
  auto number = [&](std::string_view part) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size()) throw FormatError("bad range \"" + text + "\"");
    return static_cast<Eigen::Index>(v);
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto v = number(text);
    return {v, v};
  }
  const std::string_view all(text);
  return {number(all.substr(0, dots)), number(all.substr(dots + 2))};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return {buf, ptr};
}

namespace {

struct Cell {
  Eigen::Index d, m, s;
  int trial;
};

bool uses_s(ExperimentKind k) { return k == ExperimentKind::SparseTransition; }
bool uses_m(ExperimentKind k) { return k != ExperimentKind::CounterexampleDemo; }

std::vector<Cell> cells(const ExperimentSpec& spec) {
  std::vector<Cell> out;
  const IndexRange mr = uses_m(spec.kind) ? spec.m : IndexRange{0, 0};
  const IndexRange sr = uses_s(spec.kind) ? spec.s : IndexRange{0, 0};
  for (Eigen::Index d = spec.d.lo; d <= spec.d.hi; ++d)
    for (Eigen::Index m = mr.lo; m <= mr.hi; ++m)
      for (Eigen::Index s = sr.lo; s <= sr.hi; ++s)
        for (int t = 0; t < spec.trials; ++t) out.push_back({d, m, s, t});
  return out;
}

double trial_work(const ExperimentSpec& spec, const Cell& c) {
  const double d = static_cast<double>(c.d), m = static_cast<double>(c.m);
  switch (spec.kind) {
    case ExperimentKind::PhaseTransition:
      if (spec.field == ScalarField::Real) return std::ldexp(1.0, static_cast<int>(std::min<Eigen::Index>(c.m, 1000))) * (d + 1) * (d + 1) * m;
      return spec.restarts * 500.0 * m * 8.0 * d * d;
    case ExperimentKind::SparseTransition:
      if (spec.field == ScalarField::Real) return sparse_work_estimate(c.m, c.d, c.s);
      return sparse_work_estimate(1, c.d, c.s) * spec.restarts * 60.0;
    case ExperimentKind::StabilitySweep: return static_cast<double>(spec.pairs) * 4.0 * m * d;
    case ExperimentKind::CounterexampleDemo: return 16.0 * d * d;
  }
  return 0.0;
}

ExperimentRow run_trial(const ExperimentSpec& spec, const Cell& c) {
  ExperimentRow row;
  row.d = c.d;
  row.m = c.m;
  row.s = c.s;
  row.trial = c.trial;
  row.seed = derive_seed(spec.seed, {static_cast<std::uint64_t>(c.d), static_cast<std::uint64_t>(c.m),
                                     static_cast<std::uint64_t>(c.s), static_cast<std::uint64_t>(c.trial)});
  row.metric = std::numeric_limits<double>::quiet_NaN();
  const auto start = std::chrono::steady_clock::now();

  switch (spec.kind) {
    case ExperimentKind::PhaseTransition: {
      const MeasurementEnsemble e = sample_generic(spec.field, c.m, c.d, row.seed);
      if (spec.field == ScalarField::Real) {
        row.outcome = to_string(certify_real_exact(e).outcome);
      } else if (c.m <= 3 * c.d - 1) {
        // Below 3d a collision always exists and is built directly.
        const WitnessPair w = witness_subminimal_complex(e);
        const WitnessCheck chk = check_witness(e, w);
        row.outcome = to_string(chk.ok ? Outcome::NotRetrievable : Outcome::Inconclusive);
        row.metric = chk.mismatch;
      } else {
        FalsifyConfig cfg;
        cfg.restarts = spec.restarts;
        cfg.seed = row.seed;
        const Verdict v = falsify_complex(e, cfg);
        row.outcome = to_string(v.outcome);
        row.metric = v.stats.best_residual;
      }
      break;
    }
    case ExperimentKind::SparseTransition: {
      const MeasurementEnsemble e = sample_generic(spec.field, c.m, c.d, row.seed);
      if (spec.field == ScalarField::Real) {
        row.outcome = to_string(certify_sparse_real_exact(e, c.s).outcome);
      } else {
        FalsifyConfig cfg;
        cfg.restarts = spec.restarts;
        cfg.seed = row.seed;
        const SparseVerdict v = falsify_sparse_complex(e, c.s, cfg);
        row.outcome = to_string(v.outcome);
        row.metric = v.stats.best_residual;
      }
      break;
    }
    case ExperimentKind::StabilitySweep: {
      const MeasurementEnsemble e = sample_generic(spec.field, c.m, c.d, row.seed);
      row.outcome = spec.field == ScalarField::Real ? to_string(certify_real_exact(e).outcome)
                                                    : to_string(Outcome::Inconclusive);
      row.metric = estimate_lipschitz(e, spec.radius, spec.pairs, derive_seed(row.seed, {1})).c2_hat;
      break;
    }
    case ExperimentKind::CounterexampleDemo: {
      // Trial t uses delta = 10^-(t + 1).
      const double delta = std::pow(10.0, -static_cast<double>(c.trial + 1));
      const PerturbationReport r =
          spec.field == ScalarField::Real
              ? perturb_real(build_real_minimal(c.d, default_perturbation_pairs(c.d)), delta)
              : perturb_complex(default_perturbation_base_complex(c.d), delta);
      row.m = r.perturbed.m();
      const WitnessCheck chk = check_witness(r.perturbed, r.witness);
      row.outcome = to_string(chk.ok ? Outcome::NotRetrievable : Outcome::Inconclusive);
      row.metric = r.frobenius_distance;
      break;
    }
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

void validate_experiment(const ExperimentSpec& spec) {
  auto check_range = [](const IndexRange& r, Eigen::Index min, const char* name) {
    if (r.lo > r.hi) throw DomainError("bad_range", std::string(name) + " range is empty");
    if (r.lo < min) throw DomainError("bad_range", std::string(name) + " must be at least " + std::to_string(min));
  };
  check_range(spec.d, 1, "d");
  if (uses_m(spec.kind)) check_range(spec.m, 1, "m");
  if (uses_s(spec.kind)) check_range(spec.s, 1, "s");
  if (spec.trials < 1) throw DomainError("bad_trials", "trials must be at least 1");
  if (spec.jobs < 1) throw DomainError("bad_jobs", "jobs must be at least 1");
  if (spec.restarts < 1) throw DomainError("bad_restarts", "restarts must be at least 1");
  if (spec.kind == ExperimentKind::StabilitySweep && (!(spec.radius > 0.0) || spec.pairs < 2)) {
    throw DomainError("bad_stability", "stability sweep needs radius > 0 and at least 2 pairs");
  }
  if (spec.kind == ExperimentKind::CounterexampleDemo && spec.d.lo < 2) {
    throw DomainError("precondition_d", "counterexample demo requires d >= 2");
  }
  double work = 0.0;
  for (const Cell& c : cells(spec)) work += trial_work(spec, c);
  if (work > spec.work_budget) {
    throw DomainError("budget_exceeded", "estimated work " + format_double(work) + " exceeds the budget of " +
                                             format_double(spec.work_budget));
  }
}

std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec) {
  validate_experiment(spec);
  const std::vector<Cell> todo = cells(spec);
  std::vector<ExperimentRow> rows(todo.size());
  std::vector<std::exception_ptr> errors(todo.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      try {
        rows[i] = run_trial(spec, todo[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto jobs = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(spec.jobs), todo.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  // Report the first failure in row order, independent of scheduling.
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
  return rows;
}

std::string format_csv(const ExperimentSpec& spec, const std::vector<ExperimentRow>& rows) {
  std::ostringstream os;
  os << "# affpr-experiment-csv v1\n";
  os << "kind,field,d,m,s,trial,seed,outcome,metric";
  if (spec.timing) os << ",wall_seconds";
  os << '\n';
  const std::string prefix = to_string(spec.kind) + "," + to_string(spec.field) + ",";
  for (const auto& r : rows) {
    os << prefix << r.d << ',' << r.m << ',' << r.s << ',' << r.trial << ',' << r.seed << ',' << r.outcome << ','
       << format_double(r.metric);
    if (spec.timing) os << ',' << format_double(r.wall_seconds);
    os << '\n';
  }
  return os.str();
}

std::string summarize(const std::vector<ExperimentRow>& rows) {
  struct Tally {
    int total = 0;
    std::map<std::string, int> by_outcome;
  };
  std::map<std::tuple<Eigen::Index, Eigen::Index, Eigen::Index>, Tally> cellsum;
  for (const auto& r : rows) {
    auto& t = cellsum[{r.d, r.m, r.s}];
    ++t.total;
    ++t.by_outcome[r.outcome];
  }
  std::ostringstream os;
  for (const auto& [key, t] : cellsum) {
    os << "d=" << std::get<0>(key) << " m=" << std::get<1>(key) << " s=" << std::get<2>(key) << " trials=" << t.total;
    for (const char* name : {"retrievable", "not_retrievable", "inconclusive"}) {
      auto it = t.by_outcome.find(name);
      const int count = it == t.by_outcome.end() ? 0 : it->second;
      os << ' ' << name << '=' << format_double(static_cast<double>(count) / t.total);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace affpr
