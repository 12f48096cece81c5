#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "momask/masked_gen.hpp"
#include "momask/rvq.hpp"

namespace momask {

// One JSON document drives every command. Unknown keys are rejected at every
// level so a typo cannot silently fall back to a default.
struct RunConfig {
    uint64_t seed = 0;
    int stride = 4;
    int epochs = 8;
    int jobs = 0; // 0 = library default

    RvqConfig rvq;
    DecodeConfig decode; // decode.seed is ignored; the run seed wins
    double residual_cfg_scale = 5.0;

    double predictor_alpha = 1.0;
    double uncond_drop = 0.1;
    double replace_ratio = 0.2;
    int position_buckets = 8;

    void validate() const;
    std::string to_json() const;
    static RunConfig from_json(const std::string& text);
    static RunConfig load(const std::filesystem::path& path);
};

} // namespace momask
