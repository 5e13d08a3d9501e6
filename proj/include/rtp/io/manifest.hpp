#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rtp::io {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Record of one command invocation: enough to rerun it and check outputs.
struct RunManifest {
    std::string command;
    nlohmann::json spec;
    std::vector<std::uint64_t> seeds;
    std::string tool_version;
    std::string started_at;  // UTC, ISO 8601
    double wall_clock_seconds = 0.0;
    /// Output paths relative to `root`, hashed by write().
    std::vector<std::filesystem::path> outputs;

    /// Hashes the outputs and writes the manifest to `path`.
    void write(const std::filesystem::path& path, const std::filesystem::path& root) const;
};

std::string utc_timestamp();

}  // namespace rtp::io
