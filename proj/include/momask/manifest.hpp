#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace momask {

// Record of one command invocation: config snapshot, seed, and content hashes
// of every input and output. No timestamps, so reruns with the same inputs
// produce byte-identical manifests.
struct RunManifest {
    std::string command;
    std::string artifact_version = "0.1.0";
    uint64_t seed = 0;
    std::string config_json; // embedded structurally, not as a string blob
    std::map<std::string, std::string> input_hashes;
    std::map<std::string, std::string> output_hashes;
    std::optional<std::string> metrics_json;

    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);

    std::string to_json() const;
    void write(const std::filesystem::path& path) const; // tmp file + rename
};

// FNV-1a over the file bytes, 16 hex digits
std::string file_hash_hex(const std::filesystem::path& path);

void atomic_write_text(const std::filesystem::path& path, const std::string& text);

} // namespace momask
