#include "momask/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "momask/errors.hpp"
#include "momask/rng.hpp"

namespace momask {

using nlohmann::json;

std::string file_hash_hex(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("hash: cannot open " + path.string());
    uint64_t h = 0xcbf29ce484222325ULL;
    std::vector<char> buf(1 << 16);
    while (is) {
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = fnv1a64(buf.data(), static_cast<size_t>(is.gcount()), h);
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw DataError("write: cannot open " + tmp.string());
        os << text;
        if (!os) throw DataError("write: failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void RunManifest::add_input(const std::filesystem::path& path) {
    input_hashes[path.filename().string()] = file_hash_hex(path);
}

void RunManifest::add_output(const std::filesystem::path& path) {
    output_hashes[path.filename().string()] = file_hash_hex(path);
}

std::string RunManifest::to_json() const {
    json j;
    j["command"] = command;
    j["artifact_version"] = artifact_version;
    j["seed"] = seed;
    if (!config_json.empty()) {
        try {
            j["config"] = json::parse(config_json);
        } catch (const json::exception&) {
            throw ModelError("manifest: config snapshot is not valid JSON");
        }
    }
    j["inputs"] = input_hashes;
    j["outputs"] = output_hashes;
    if (metrics_json) {
        try {
            j["metrics"] = json::parse(*metrics_json);
        } catch (const json::exception&) {
            throw ModelError("manifest: metrics snapshot is not valid JSON");
        }
    }
    return j.dump(2);
}

void RunManifest::write(const std::filesystem::path& path) const {
    atomic_write_text(path, to_json() + "\n");
}

} // namespace momask
