#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace airgam {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance record written beside every output file: the command, its full
/// parameter set, input digests, tool version, timestamp and seed. Outputs
/// themselves never embed timestamps, so reruns with equal parameters and
/// inputs are byte-identical; only the manifest timestamp differs.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> parameters;
    std::map<std::string, std::string> input_digests;  // path -> fnv1a64 hex
    std::string tool_version = kToolVersion;
    std::string timestamp;  // ISO-8601 UTC
    std::string seed;       // empty when the command takes none

    nlohmann::json to_json() const;
    /// Writes <output_path>.manifest.json atomically.
    void write_beside(const std::string& output_path) const;
};

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex characters.
std::string file_digest(const std::string& path);

std::string utc_timestamp_now();

}  // namespace airgam
