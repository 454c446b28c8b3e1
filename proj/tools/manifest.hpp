#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mpa::cli {

std::string sha256_hex(const std::string& bytes);

/// Provenance block embedded in every artifact the CLI writes. Only
/// `timestamp` varies between reruns with identical inputs.
struct RunManifest {
    std::string command;
    // (path as given, sha256 of contents)
    std::vector<std::pair<std::string, std::string>> inputs;
    std::string config_sha256;
    std::vector<std::uint64_t> seeds;
    nlohmann::json settings = nlohmann::json::object();
    std::string version;
    std::string timestamp;

    void add_input(const std::string& path, const std::string& contents);
};

nlohmann::json to_json(const RunManifest& m);

/// UTC, ISO 8601, second resolution.
std::string utc_timestamp();

}  // namespace mpa::cli
