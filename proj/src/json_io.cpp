#include "affpr/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace affpr {

namespace {

[[noreturn]] void bad(const std::string& what) { throw FormatError(what); }

const json& member(const json& j, const char* key) {
  if (!j.is_object()) bad(std::string("expected an object holding \"") + key + "\"");
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing key \"") + key + "\"");
  return *it;
}

json real_out(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double real_in(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  if (!j.is_number()) bad("expected a number");
  return j.get<double>();
}

double finite_in(const json& j) {
  if (!j.is_number()) bad("expected a finite number");
  return j.get<double>();
}

json scalar_out(ScalarField f, cdouble z) {
  if (f == ScalarField::Real) return real_out(z.real());
  return json::array({real_out(z.real()), real_out(z.imag())});
}

cdouble scalar_in(ScalarField f, const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (f == ScalarField::Complex && j.is_array() && j.size() == 2) return {finite_in(j[0]), finite_in(j[1])};
  bad(f == ScalarField::Real ? "real entries must be numbers" : "complex entries must be numbers or [re, im]");
}

json vector_out(ScalarField f, const Eigen::VectorXcd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(scalar_out(f, v(i)));
  return a;
}

Eigen::VectorXcd vector_in(ScalarField f, const json& j) {
  if (!j.is_array()) bad("expected an array of scalars");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = scalar_in(f, j[i]);
  return v;
}

ScalarField field_in(const json& j) {
  const json& f = member(j, "field");
  if (!f.is_string()) bad("\"field\" must be a string");
  try {
    return parse_field(f.get<std::string>());
  } catch (const std::exception&) {
    bad("unknown field \"" + f.get<std::string>() + "\"");
  }
}

std::int64_t int_in(const json& j) {
  if (!j.is_number_integer()) bad("expected an integer");
  return j.get<std::int64_t>();
}

json index_list(const std::vector<Eigen::Index>& idx) {
  json a = json::array();
  for (auto i : idx) a.push_back(static_cast<std::int64_t>(i));
  return a;
}

std::vector<Eigen::Index> index_list_in(const json& j) {
  if (!j.is_array()) bad("expected an index array");
  std::vector<Eigen::Index> out;
  for (const auto& v : j) out.push_back(static_cast<Eigen::Index>(int_in(v)));
  return out;
}

json pair_out(const WitnessPair& w) { return {{"x", to_json(w.x)}, {"y", to_json(w.y)}}; }

WitnessPair pair_in(const json& j) { return {signal_from_json(member(j, "x")), signal_from_json(member(j, "y"))}; }

json stats_out(const SearchStats& s) {
  return {{"restarts_tried", s.restarts_tried},
          {"best_residual", real_out(s.best_residual)},
          {"subsets_checked", s.subsets_checked},
          {"note", s.note}};
}

SearchStats stats_in(const json& j) {
  SearchStats s;
  s.restarts_tried = static_cast<int>(int_in(member(j, "restarts_tried")));
  s.best_residual = real_in(member(j, "best_residual"));
  s.subsets_checked = static_cast<std::uint64_t>(int_in(member(j, "subsets_checked")));
  const json& note = member(j, "note");
  if (!note.is_string()) bad("\"note\" must be a string");
  s.note = note.get<std::string>();
  return s;
}

Outcome outcome_in(const json& j) {
  const std::string s = j.is_string() ? j.get<std::string>() : "";
  if (s == "retrievable") return Outcome::Retrievable;
  if (s == "not_retrievable") return Outcome::NotRetrievable;
  if (s == "inconclusive") return Outcome::Inconclusive;
  bad("unknown outcome \"" + s + "\"");
}

Certificate certificate_in(const json& j) {
  const std::string s = j.is_string() ? j.get<std::string>() : "";
  if (s == "exact_subset_check") return Certificate::ExactSubsetCheck;
  if (s == "structured_construction") return Certificate::StructuredConstruction;
  if (s == "none") return Certificate::None;
  bad("unknown certificate \"" + s + "\"");
}

json attaining_out(const AttainingPair& a) {
  return {{"x", to_json(a.pair.x)}, {"y", to_json(a.pair.y)}, {"ratio", real_out(a.ratio)}, {"index", a.index}};
}

AttainingPair attaining_in(const json& j) {
  return {pair_in(j), real_in(member(j, "ratio")), int_in(member(j, "index"))};
}

}  // namespace

json to_json(const MeasurementEnsemble& e) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < e.m(); ++r) rows.push_back(vector_out(e.field, e.rows.row(r).transpose()));
  return {{"field", to_string(e.field)},
          {"m", static_cast<std::int64_t>(e.m())},
          {"d", static_cast<std::int64_t>(e.d())},
          {"rows", rows},
          {"shifts", vector_out(e.field, e.shifts)}};
}

MeasurementEnsemble ensemble_from_json(const json& j) {
  const ScalarField f = field_in(j);
  const auto m = int_in(member(j, "m"));
  const auto d = int_in(member(j, "d"));
  const json& rows = member(j, "rows");
  if (!rows.is_array() || static_cast<std::int64_t>(rows.size()) != m) bad("\"rows\" must hold m rows");
  if (m < 0 || d < 0) bad("\"m\" and \"d\" must be nonnegative");
  Eigen::MatrixXcd a(m, d);
  for (std::int64_t r = 0; r < m; ++r) {
    const Eigen::VectorXcd row = vector_in(f, rows[static_cast<std::size_t>(r)]);
    if (row.size() != d) bad("row " + std::to_string(r) + " does not have d entries");
    a.row(r) = row.transpose();
  }
  const Eigen::VectorXcd b = vector_in(f, member(j, "shifts"));
  if (b.size() != m) bad("\"shifts\" must hold m entries");
  return {f, a, b};
}

json to_json(const Signal& x) {
  return {{"field", to_string(x.field)}, {"d", static_cast<std::int64_t>(x.dim())}, {"entries", vector_out(x.field, x.entries)}};
}

Signal signal_from_json(const json& j) {
  const ScalarField f = field_in(j);
  Eigen::VectorXcd v = vector_in(f, member(j, "entries"));
  if (j.contains("d") && int_in(j["d"]) != v.size()) bad("\"d\" does not match the entry count");
  return {f, v};
}

json to_json(const MagnitudeVector& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.size(); ++i) a.push_back(real_out(m.values(i)));
  return {{"m", static_cast<std::int64_t>(m.size())}, {"values", a}};
}

MagnitudeVector magnitudes_from_json(const json& j) {
  const json& arr = j.is_array() ? j : member(j, "values");
  if (!arr.is_array()) bad("\"values\" must be an array");
  MagnitudeVector m;
  m.values.resize(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) m.values(static_cast<Eigen::Index>(i)) = finite_in(arr[i]);
  if (j.is_object() && j.contains("m") && int_in(j["m"]) != m.size()) bad("\"m\" does not match the value count");
  return m;
}

json to_json(const Verdict& v) {
  json w = nullptr;
  if (v.witness || v.uv) {
    w = json::object();
    if (v.witness) {
      w["x"] = to_json(v.witness->x);
      w["y"] = to_json(v.witness->y);
    }
    if (v.uv) {
      w["u"] = to_json(v.uv->u);
      w["v"] = to_json(v.uv->v);
    }
  }
  return {{"outcome", to_string(v.outcome)},
          {"certificate", to_string(v.certificate)},
          {"witness", w},
          {"failing_subset", index_list(v.failing_subset)},
          {"stats", stats_out(v.stats)}};
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  v.outcome = outcome_in(member(j, "outcome"));
  v.certificate = certificate_in(member(j, "certificate"));
  const json& w = member(j, "witness");
  if (!w.is_null()) {
    if (!w.is_object()) bad("\"witness\" must be an object or null");
    if (w.contains("x")) v.witness = pair_in(w);
    if (w.contains("u")) v.uv = UVWitness{signal_from_json(member(w, "u")), signal_from_json(member(w, "v"))};
  }
  v.failing_subset = index_list_in(member(j, "failing_subset"));
  v.stats = stats_in(member(j, "stats"));
  return v;
}

json to_json(const PerturbationReport& r) {
  return {{"original", to_json(r.original)},
          {"perturbed", to_json(r.perturbed)},
          {"delta", real_out(r.delta)},
          {"frobenius_distance", real_out(r.frobenius_distance)},
          {"witness", pair_out(r.witness)}};
}

PerturbationReport perturbation_from_json(const json& j) {
  PerturbationReport r;
  r.original = ensemble_from_json(member(j, "original"));
  r.perturbed = ensemble_from_json(member(j, "perturbed"));
  r.delta = finite_in(member(j, "delta"));
  r.frobenius_distance = finite_in(member(j, "frobenius_distance"));
  r.witness = pair_in(member(j, "witness"));
  return r;
}

json to_json(const RecoveryResult& r) {
  json hist = json::array();
  for (double h : r.residual_history) hist.push_back(real_out(h));
  return {{"x_hat", to_json(r.x_hat)},
          {"residual", real_out(r.residual)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"restarts_used", r.restarts_used},
          {"residual_history", hist}};
}

RecoveryResult recovery_from_json(const json& j) {
  RecoveryResult r;
  r.x_hat = signal_from_json(member(j, "x_hat"));
  r.residual = real_in(member(j, "residual"));
  r.iterations = static_cast<int>(int_in(member(j, "iterations")));
  const json& c = member(j, "converged");
  if (!c.is_boolean()) bad("\"converged\" must be a boolean");
  r.converged = c.get<bool>();
  r.restarts_used = static_cast<int>(int_in(member(j, "restarts_used")));
  const json& hist = member(j, "residual_history");
  if (!hist.is_array()) bad("\"residual_history\" must be an array");
  for (const auto& h : hist) r.residual_history.push_back(real_in(h));
  return r;
}

json to_json(const LipschitzEstimate& l) {
  return {{"c1_hat", real_out(l.c1_hat)},
          {"C1_hat", real_out(l.C1_hat)},
          {"c2_hat", real_out(l.c2_hat)},
          {"C2_hat", real_out(l.C2_hat)},
          {"samples", l.samples},
          {"radius", real_out(l.radius)},
          {"seed", l.seed},
          {"attaining",
           {{"c1", attaining_out(l.c1_pair)},
            {"C1", attaining_out(l.C1_pair)},
            {"c2", attaining_out(l.c2_pair)},
            {"C2", attaining_out(l.C2_pair)}}}};
}

LipschitzEstimate lipschitz_from_json(const json& j) {
  LipschitzEstimate l;
  l.c1_hat = finite_in(member(j, "c1_hat"));
  l.C1_hat = finite_in(member(j, "C1_hat"));
  l.c2_hat = finite_in(member(j, "c2_hat"));
  l.C2_hat = finite_in(member(j, "C2_hat"));
  l.samples = int_in(member(j, "samples"));
  l.radius = finite_in(member(j, "radius"));
  const json& seed = member(j, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) bad("\"seed\" must be an integer");
  l.seed = seed.get<std::uint64_t>();
  const json& a = member(j, "attaining");
  l.c1_pair = attaining_in(member(a, "c1"));
  l.C1_pair = attaining_in(member(a, "C1"));
  l.c2_pair = attaining_in(member(a, "c2"));
  l.C2_pair = attaining_in(member(a, "C2"));
  return l;
}

json to_json(const SparseVerdict& v) {
  json pair = nullptr;
  if (v.failing_pair) pair = {{"I", index_list(v.failing_pair->first)}, {"J", index_list(v.failing_pair->second)}};
  return {{"outcome", to_string(v.outcome)},
          {"failing_pair", pair},
          {"witness", v.witness ? pair_out(*v.witness) : json(nullptr)},
          {"failing_subset", index_list(v.failing_subset)},
          {"stats", stats_out(v.stats)}};
}

SparseVerdict sparse_verdict_from_json(const json& j) {
  SparseVerdict v;
  v.outcome = outcome_in(member(j, "outcome"));
  const json& pair = member(j, "failing_pair");
  if (!pair.is_null()) v.failing_pair = SupportPair{index_list_in(member(pair, "I")), index_list_in(member(pair, "J"))};
  const json& w = member(j, "witness");
  if (!w.is_null()) v.witness = pair_in(w);
  v.failing_subset = index_list_in(member(j, "failing_subset"));
  v.stats = stats_in(member(j, "stats"));
  return v;
}

json to_json(const ShiftPairSpec& s) {
  json a = json::array();
  for (const auto& [b1, b2] : s.pairs) a.push_back(json::array({real_out(b1), real_out(b2)}));
  return {{"pairs", a}};
}

ShiftPairSpec shift_pairs_from_json(const json& j) {
  const json& a = member(j, "pairs");
  if (!a.is_array()) bad("\"pairs\" must be an array");
  ShiftPairSpec s;
  for (const auto& p : a) {
    if (!p.is_array() || p.size() != 2) bad("each shift pair must be [b1, b2]");
    s.pairs.emplace_back(finite_in(p[0]), finite_in(p[1]));
  }
  return s;
}

json to_json(const ShiftTripleSpec& s) {
  json a = json::array();
  for (const auto& t : s.triples) {
    json row = json::array();
    for (const cdouble& z : t) row.push_back(scalar_out(ScalarField::Complex, z));
    a.push_back(row);
  }
  return {{"triples", a}};
}

ShiftTripleSpec shift_triples_from_json(const json& j) {
  const json& a = member(j, "triples");
  if (!a.is_array()) bad("\"triples\" must be an array");
  ShiftTripleSpec s;
  for (const auto& t : a) {
    if (!t.is_array() || t.size() != 3) bad("each shift triple must hold three complex numbers");
    s.triples.push_back({scalar_in(ScalarField::Complex, t[0]), scalar_in(ScalarField::Complex, t[1]),
                         scalar_in(ScalarField::Complex, t[2])});
  }
  return s;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::exception& ex) {
    throw FormatError(path + ": " + ex.what());
  }
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp);
    out << text;
    out.flush();
    if (!out) throw FormatError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw FormatError("cannot move output into place at " + path);
  }
}

}  // namespace affpr
