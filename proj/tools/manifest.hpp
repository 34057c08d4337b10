#ifndef MEDZISC_TOOLS_MANIFEST_HPP
#define MEDZISC_TOOLS_MANIFEST_HPP

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace medzisc::cli {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/**
 * Everything needed to rerun a command: the command line, the resolved
 * configuration with every default written out, input digests, version and
 * time. Written as manifest.json next to the outputs.
 */
struct RunManifest {
    std::string command;
    std::vector<std::string> arguments;
    nlohmann::json config;
    std::uint64_t seed = 0;
    int threads = 1;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::string> outputs;
    nlohmann::json timing = nlohmann::json::object();

    nlohmann::json to_json() const;
    void write(const std::filesystem::path& dir) const;
};

}  // namespace medzisc::cli

#endif  // MEDZISC_TOOLS_MANIFEST_HPP
