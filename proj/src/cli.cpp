#include "affpr/cli.hpp"

#include "affpr/certify.hpp"
#include "affpr/construct.hpp"
#include "affpr/experiment.hpp"
#include "affpr/json_io.hpp"
#include "affpr/recover.hpp"
#include "affpr/sparse.hpp"
#include "affpr/stability.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <functional>
#include <ostream>
#include <sstream>

namespace affpr {

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  const char* env = std::getenv("AFFPR_LOG");
  const std::string v = env ? env : "";
  if (v == "error") return Level::Error;
  if (v == "info") return Level::Info;
  if (v == "debug") return Level::Debug;
  return Level::Warn;
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  Level level = log_level();

  void log(Level l, const std::string& msg) const {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (l <= level) err << "affpr[" << names[static_cast<int>(l)] << "] " << msg << '\n';
  }
};

// Flag values shared by the subcommands; each subcommand binds what it uses.
struct Flags {
  std::string in, out, signal, mags, kind, field = "real", csv, m = "4", d = "2", s = "1", x0;
  double tol = 1e-10, delta = 0.1, radius = 5.0, r = 1e6, budget = 1e12;
  std::uint64_t seed = 0;
  int trials = 1, restarts = 32, jobs = 1, cap = 24;
  std::int64_t pairs = 1000;
  bool exact = false, timing = false;
};

void emit(const Context& ctx, const Flags& f, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (f.out.empty()) {
    ctx.out << text;
  } else {
    write_text_atomic(f.out, text);
    ctx.log(Level::Info, "wrote " + f.out);
  }
}

MeasurementEnsemble load_ensemble(const Flags& f) {
  if (f.in.empty()) throw FormatError("--in is required");
  return ensemble_from_json(read_json_file(f.in));
}

Eigen::Index single_index(const std::string& text, const char* name) {
  const IndexRange r = IndexRange::parse(text);
  if (r.lo != r.hi) throw FormatError(std::string("--") + name + " takes a single value here");
  return r.lo;
}

int cmd_certify(const Context& ctx, const Flags& f) {
  const MeasurementEnsemble e = load_ensemble(f);
  ctx.log(Level::Info, "certify m=" + std::to_string(e.m()) + " d=" + std::to_string(e.d()));
  Verdict v;
  if (e.field == ScalarField::Real) {
    CertifyOptions opts;
    opts.enumeration_cap = f.cap;
    opts.exact_rational = f.exact;
    v = certify_real_exact(e, RankTolerance{f.tol}, opts);
  } else {
    v = certify_structured(e, RankTolerance{f.tol});
    if (v.outcome == Outcome::Inconclusive) {
      ctx.log(Level::Info, "no structured certificate; running the falsifier");
      FalsifyConfig cfg;
      cfg.restarts = f.restarts;
      cfg.seed = f.seed;
      v = falsify_complex(e, cfg);
    }
  }
  emit(ctx, f, to_json(v));
  return 0;
}

int cmd_falsify(const Context& ctx, const Flags& f) {
  FalsifyConfig cfg;
  cfg.restarts = f.restarts;
  cfg.seed = f.seed;
  emit(ctx, f, to_json(falsify_complex(load_ensemble(f), cfg)));
  return 0;
}

int cmd_construct(const Context& ctx, const Flags& f) {
  const ScalarField field = parse_field(f.field);
  MeasurementEnsemble e;
  if (f.kind == "real-minimal") {
    const Eigen::Index d = single_index(f.d, "d");
    e = build_real_minimal(d, f.in.empty() ? default_perturbation_pairs(d) : shift_pairs_from_json(read_json_file(f.in)));
  } else if (f.kind == "complex-minimal") {
    if (f.in.empty()) throw FormatError("complex-minimal needs --in with {\"triples\": ...}");
    const json j = read_json_file(f.in);
    const ShiftTripleSpec spec = shift_triples_from_json(j);
    const auto d = static_cast<Eigen::Index>(spec.triples.size());
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Identity(d, d);
    if (j.contains("B")) {
      const json& rows = j["B"];
      if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != d) throw FormatError("\"B\" must be d x d");
      json fake = {{"field", "complex"}, {"m", d}, {"d", d}, {"rows", rows}, {"shifts", json::array()}};
      for (Eigen::Index i = 0; i < d; ++i) fake["shifts"].push_back(0.0);
      b = ensemble_from_json(fake).rows;
    }
    e = build_complex_minimal(b, spec, RankTolerance{f.tol});
  } else if (f.kind == "generic") {
    e = sample_generic(field, single_index(f.m, "m"), single_index(f.d, "d"), f.seed);
  } else if (f.kind == "perturbation-base") {
    const Eigen::Index d = single_index(f.d, "d");
    e = field == ScalarField::Real ? build_real_minimal(d, default_perturbation_pairs(d))
                                   : default_perturbation_base_complex(d);
  } else {
    throw FormatError("unknown construction \"" + f.kind +
                      "\" (real-minimal, complex-minimal, generic, perturbation-base)");
  }
  emit(ctx, f, to_json(e));
  return 0;
}

int cmd_measure(const Context& ctx, const Flags& f) {
  const MeasurementEnsemble e = load_ensemble(f);
  if (f.signal.empty()) throw FormatError("--signal is required");
  emit(ctx, f, to_json(measure(e, signal_from_json(read_json_file(f.signal)))));
  return 0;
}

int cmd_recover(const Context& ctx, const Flags& f) {
  const MeasurementEnsemble e = load_ensemble(f);
  if (f.mags.empty()) throw FormatError("--mags is required");
  GaussNewtonConfig cfg;
  cfg.restarts = f.restarts;
  cfg.seed = f.seed;
  const RecoveryResult r = recover(e, magnitudes_from_json(read_json_file(f.mags)), cfg);
  if (!r.converged) ctx.log(Level::Warn, "recovery did not reach the residual target");
  emit(ctx, f, to_json(r));
  return 0;
}

int cmd_perturb(const Context& ctx, const Flags& f) {
  const Eigen::Index d = single_index(f.d, "d");
  PerturbationReport r;
  if (f.kind == "real") {
    r = perturb_real(f.in.empty() ? build_real_minimal(d, default_perturbation_pairs(d)) : load_ensemble(f), f.delta);
  } else if (f.kind == "complex") {
    r = perturb_complex(f.in.empty() ? default_perturbation_base_complex(d) : load_ensemble(f), f.delta);
  } else {
    throw FormatError("--kind must be real or complex");
  }
  if (r.original.d() != d) throw DomainError("dimension_mismatch", "--d does not match the input ensemble");
  emit(ctx, f, to_json(r));
  return 0;
}

int cmd_sparse(const Context& ctx, const Flags& f) {
  const MeasurementEnsemble e = load_ensemble(f);
  const Eigen::Index s = single_index(f.s, "s");
  SparseVerdict v;
  if (e.field == ScalarField::Real) {
    SparseCertifyOptions opts;
    opts.enumeration_cap = f.cap;
    opts.work_budget = f.budget;
    v = certify_sparse_real_exact(e, s, RankTolerance{f.tol}, opts);
  } else {
    FalsifyConfig cfg;
    cfg.restarts = f.restarts;
    cfg.seed = f.seed;
    v = falsify_sparse_complex(e, s, cfg);
  }
  emit(ctx, f, to_json(v));
  return 0;
}

int cmd_stability(const Context& ctx, const Flags& f) {
  const MeasurementEnsemble e = load_ensemble(f);
  std::vector<PairRatios> ratios;
  const LipschitzEstimate est = estimate_lipschitz(e, f.radius, f.pairs, f.seed, {}, f.csv.empty() ? nullptr : &ratios);
  json j = to_json(est);
  if (!f.x0.empty()) {
    const Signal x0 = signal_from_json(read_json_file(f.x0));
    j["anisotropy"] = {{"r", f.r}, {"ratio", anisotropy_ratio(e, x0, f.r)}};
  }
  if (!f.csv.empty()) {
    std::ostringstream os;
    os << "# affpr-stability-csv v1\nindex,r1_lower,r1_upper,r2_lower,r2_upper\n";
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      const auto& r = ratios[i];
      os << i << ',' << format_double(r.r1_lower) << ',' << format_double(r.r1_upper) << ','
         << format_double(r.r2_lower) << ',' << format_double(r.r2_upper) << '\n';
    }
    write_text_atomic(f.csv, os.str());
  }
  emit(ctx, f, j);
  return 0;
}

int cmd_experiment(const Context& ctx, const Flags& f) {
  ExperimentSpec spec;
  spec.kind = parse_experiment_kind(f.kind);
  spec.field = parse_field(f.field);
  spec.d = IndexRange::parse(f.d);
  spec.m = IndexRange::parse(f.m);
  spec.s = IndexRange::parse(f.s);
  spec.trials = f.trials;
  spec.seed = f.seed;
  spec.out_path = f.out;
  spec.jobs = f.jobs;
  spec.restarts = f.restarts;
  spec.radius = f.radius;
  spec.pairs = f.pairs;
  spec.work_budget = f.budget;
  spec.timing = f.timing;
  const auto rows = run_experiment(spec);
  const std::string csv = format_csv(spec, rows);
  if (spec.out_path.empty()) {
    ctx.out << csv;
  } else {
    write_text_atomic(spec.out_path, csv);
    ctx.out << summarize(rows);
  }
  return 0;
}

int cmd_validate(const Context& ctx, const Flags& f) {
  if (f.in.empty()) throw FormatError("--in is required");
  const json j = read_json_file(f.in);
  const std::string kind = f.kind.empty() ? "ensemble" : f.kind;
  std::vector<Violation> violations;
  if (kind == "ensemble") {
    violations = validate_ensemble(ensemble_from_json(j));
  } else if (kind == "signal") {
    violations = validate_signal(signal_from_json(j));
  } else if (kind == "magnitudes") {
    magnitudes_from_json(j);
  } else if (kind == "verdict") {
    verdict_from_json(j);
  } else if (kind == "sparse-verdict") {
    sparse_verdict_from_json(j);
  } else if (kind == "perturbation") {
    perturbation_from_json(j);
  } else if (kind == "recovery") {
    recovery_from_json(j);
  } else if (kind == "lipschitz") {
    lipschitz_from_json(j);
  } else if (kind == "shift-pairs") {
    shift_pairs_from_json(j);
  } else if (kind == "shift-triples") {
    shift_triples_from_json(j);
  } else {
    throw FormatError("unknown document kind \"" + kind + "\"");
  }
  json list = json::array();
  for (const auto& v : violations) list.push_back({{"field", v.field}, {"message", v.message}});
  emit(ctx, f, {{"valid", violations.empty()}, {"violations", list}});
  return violations.empty() ? 0 : 1;
}

json error_json(const std::string& kind, const std::string& code, const std::string& message) {
  return {{"error", {{"kind", kind}, {"code", code}, {"message", message}}}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  Flags f;
  CLI::App app{"Affine phase retrieval: certification, construction, recovery, stability", "affpr"};
  app.require_subcommand(1);

  auto input = [&](CLI::App* c) { c->add_option("--in", f.in, "input JSON"); };
  auto output = [&](CLI::App* c) { c->add_option("--out", f.out, "output path (default stdout)"); };
  auto seeded = [&](CLI::App* c) {
    c->add_option("--seed", f.seed, "master seed");
    c->add_option("--restarts", f.restarts, "search restarts")->check(CLI::PositiveNumber);
  };
  std::function<int(const Context&, const Flags&)> action;
  auto sub = [&](const char* name, const char* help, int (*fn)(const Context&, const Flags&)) {
    CLI::App* c = app.add_subcommand(name, help);
    c->callback([&action, fn] { action = fn; });
    return c;
  };

  CLI::App* c = sub("certify", "decide retrievability (exact for real ensembles)", cmd_certify);
  input(c), output(c), seeded(c);
  c->add_option("--tol", f.tol, "relative rank tolerance")->check(CLI::PositiveNumber);
  c->add_option("--cap", f.cap, "largest m accepted by the subset enumeration");
  c->add_flag("--exact", f.exact, "re-check rank decisions in rational arithmetic");

  c = sub("falsify", "search for a collision of a complex ensemble", cmd_falsify);
  input(c), output(c), seeded(c);

  c = sub("construct", "build an ensemble", cmd_construct);
  input(c), output(c);
  c->add_option("--kind", f.kind, "real-minimal | complex-minimal | generic | perturbation-base")->required();
  c->add_option("--field", f.field, "real | complex");
  c->add_option("--d", f.d, "signal dimension");
  c->add_option("--m", f.m, "measurement count (generic)");
  c->add_option("--seed", f.seed, "seed (generic)");
  c->add_option("--tol", f.tol, "relative rank tolerance")->check(CLI::PositiveNumber);

  c = sub("measure", "evaluate magnitudes of a signal", cmd_measure);
  input(c), output(c);
  c->add_option("--signal", f.signal, "signal JSON")->required();

  c = sub("recover", "recover a signal from magnitudes", cmd_recover);
  input(c), output(c), seeded(c);
  c->add_option("--mags", f.mags, "magnitudes JSON")->required();

  c = sub("perturb", "break retrievability with a small perturbation", cmd_perturb);
  input(c), output(c);
  c->add_option("--kind", f.kind, "real | complex")->required();
  c->add_option("--d", f.d, "signal dimension");
  c->add_option("--delta", f.delta, "perturbation size")->check(CLI::PositiveNumber);

  c = sub("sparse-certify", "decide retrievability on s-sparse signals", cmd_sparse);
  input(c), output(c), seeded(c);
  c->add_option("--s", f.s, "sparsity")->required();
  c->add_option("--tol", f.tol, "relative rank tolerance")->check(CLI::PositiveNumber);
  c->add_option("--cap", f.cap, "largest m accepted by the enumeration");
  c->add_option("--budget", f.budget, "work budget in scalar operations");

  c = sub("stability", "estimate bi-Lipschitz constants on a ball", cmd_stability);
  input(c), output(c);
  c->add_option("--radius", f.radius, "ball radius")->check(CLI::PositiveNumber);
  c->add_option("--pairs", f.pairs, "number of sampled pairs");
  c->add_option("--seed", f.seed, "sampling seed");
  c->add_option("--csv", f.csv, "write every sampled ratio to this CSV");
  c->add_option("--x0", f.x0, "signal JSON for the anisotropy ratio");
  c->add_option("--r", f.r, "scale for the anisotropy ratio")->check(CLI::PositiveNumber);

  c = sub("experiment", "run a seeded batch experiment", cmd_experiment);
  output(c), seeded(c);
  c->add_option("--kind", f.kind, "phase-transition | sparse-transition | stability-sweep | counterexample-demo")
      ->required();
  c->add_option("--field", f.field, "real | complex");
  c->add_option("--d", f.d, "value or range a..b");
  c->add_option("--m", f.m, "value or range a..b");
  c->add_option("--s", f.s, "value or range a..b");
  c->add_option("--trials", f.trials, "trials per cell");
  c->add_option("--jobs", f.jobs, "worker threads");
  c->add_option("--radius", f.radius, "ball radius (stability-sweep)");
  c->add_option("--pairs", f.pairs, "sampled pairs (stability-sweep)");
  c->add_option("--budget", f.budget, "work budget in scalar operations");
  c->add_flag("--timing", f.timing, "add a wall-time column");

  c = sub("validate", "check a JSON document", cmd_validate);
  input(c), output(c);
  c->add_option("--kind", f.kind, "ensemble (default), signal, magnitudes, verdict, sparse-verdict, ...");

  std::vector<std::string> argv_store{"affpr"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    return action(ctx, f);
  } catch (const DomainError& e) {
    err << error_json("domain", e.code(), e.what()).dump() << '\n';
    return 1;
  } catch (const FormatError& e) {
    err << error_json("format", "format", e.what()).dump() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << error_json("format", "json", e.what()).dump() << '\n';
    return 2;
  } catch (const std::ios_base::failure& e) {
    err << error_json("io", "io", e.what()).dump() << '\n';
    return 2;
  }
}

}  // namespace affpr
