#pragma once

#include "qmac/regions.hpp"
#include "qmac/simulator.hpp"

#include <json.hpp>

#include <string>

namespace qmac {

inline constexpr const char* kToolVersion = "qmac 0.1.0";

/// A parsed channel spec file: either a channel model or a bosonic
/// parameter set (which only has closed-form evaluators).
struct LoadedChannel {
    std::optional<Channel> channel;
    std::optional<BosonicParams> bosonic;
};

// Parses a channel spec file. Top-level `kind` selects the layout:
//   "kraus":    dims d_a1, d_a1p, d_e, d_a2, d_b plus Kraus lists L and N
//   "cq_table": card_x1, card_x2, d_b, output table, cribbing
//   "bosonic":  eta1, eta2, n_a1, n_a2, n_c
// Complex matrices are arrays of rows of [re, im] pairs. Parse and
// validation failures throw Error::validation naming the offending key.
LoadedChannel load_channel_file(const std::string& path);

// Parses an ensemble file: cardinalities, p_u, p_x1_given, p_x2_given,
// optional theta/zeta state tables and an optional instrument Kraus list.
EnsembleSpec load_ensemble_file(const std::string& path);

LoadedChannel parse_channel_json(const nlohmann::json& j);
EnsembleSpec parse_ensemble_json(const nlohmann::json& j);

// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& key);

nlohmann::json bounds_to_json(const RateBounds& b);
nlohmann::json ensemble_to_json(const EnsembleSpec& ens);
// Timing can be excluded so written artifacts stay byte-identical across
// reruns; the CLI reports wall time on stderr instead.
nlohmann::json sim_report_to_json(const SimReport& rep, bool include_timing = true);

/// Provenance block embedded in every output artifact (JSON field, or a
/// leading comment line in CSV).
struct RunManifest {
    std::string command;
    std::vector<std::string> inputs;
    std::string parameters;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;
    std::vector<std::string> outputs;
};

nlohmann::json manifest_to_json(const RunManifest& m);
// single-line CSV header comment: "# manifest <json>"
std::string manifest_comment(const RunManifest& m);

} // namespace qmac
