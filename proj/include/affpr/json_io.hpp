// JSON forms of every library value that crosses the CLI boundary.
//
// Real scalars are plain numbers, complex scalars are [re, im]. Non-finite
// reals (an unbounded residual, say) are written as null and read back as
// +infinity. Reading malformed input throws FormatError; writing then reading
// then writing is the identity.
#pragma once

#include "affpr/certify.hpp"
#include "affpr/construct.hpp"
#include "affpr/core.hpp"
#include "affpr/recover.hpp"
#include "affpr/sparse.hpp"
#include "affpr/stability.hpp"

#include <json.hpp>

#include <string>

namespace affpr {

using json = nlohmann::ordered_json;

json to_json(const MeasurementEnsemble& e);
json to_json(const Signal& x);
json to_json(const MagnitudeVector& m);
json to_json(const Verdict& v);
json to_json(const PerturbationReport& r);
json to_json(const RecoveryResult& r);
json to_json(const LipschitzEstimate& l);
json to_json(const SparseVerdict& v);
json to_json(const ShiftPairSpec& s);
json to_json(const ShiftTripleSpec& s);

MeasurementEnsemble ensemble_from_json(const json& j);
Signal signal_from_json(const json& j);
MagnitudeVector magnitudes_from_json(const json& j);
Verdict verdict_from_json(const json& j);
PerturbationReport perturbation_from_json(const json& j);
RecoveryResult recovery_from_json(const json& j);
LipschitzEstimate lipschitz_from_json(const json& j);
SparseVerdict sparse_verdict_from_json(const json& j);
ShiftPairSpec shift_pairs_from_json(const json& j);
ShiftTripleSpec shift_triples_from_json(const json& j);

/// Throws FormatError on unreadable files or invalid JSON.
json read_json_file(const std::string& path);
/// Writes through a temporary file and a rename. Throws FormatError on failure.
void write_text_atomic(const std::string& path, const std::string& text);

}  // namespace affpr
