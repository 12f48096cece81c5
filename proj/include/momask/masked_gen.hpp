#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "momask/matrix.hpp"
#include "momask/predictor.hpp"
#include "momask/rng.hpp"

namespace momask {

enum class MaskSchedule { Cosine, Linear };
MaskSchedule parse_schedule(const std::string& name);
const char* schedule_name(MaskSchedule s);

// cos(pi*tau/2): 1 at tau=0, 0 at tau=1
double mask_ratio(double tau);
double schedule_ratio(MaskSchedule schedule, double tau);

// tau ~ U(0,1), then a uniform subset of size max(1, round(n*ratio)).
// Returned positions are sorted.
std::vector<size_t> sample_training_mask(size_t n, Rng& rng);

// (1+s)*cond - s*uncond, elementwise
Matrix cfg_logits(const Matrix& cond, const Matrix& uncond, double s);

struct DecodeConfig {
    int iterations = 10;         // L
    double cfg_scale = 4.0;      // s
    double temperature = 1.0;    // tau0, scales the confidence noise
    uint64_t seed = 0;
    MaskSchedule schedule = MaskSchedule::Cosine;
    bool greedy = false;         // argmax instead of categorical sampling
    bool cond_only = false;      // skip the unconditional branch entirely

    void validate() const;
};

struct DecodeResult {
    std::vector<int32_t> tokens;
    std::vector<size_t> masked_counts; // non-pinned positions still masked after each iteration
    size_t predictor_passes = 0;       // one per iteration; a CFG pair counts once
};

// Confidence-based iterative decode of one base-layer row. Starts all
// non-pinned positions masked; per iteration samples every masked position,
// scores confidence = ln p(sampled) + tau_l * Gumbel with tau_l annealed to
// zero, and commits the top scorers so exactly m_l = ceil(n_free *
// schedule_ratio(l/L)) stay masked (m_L = 0). Committed tokens never change.
DecodeResult iterative_decode(const Predictor& pred, size_t n, const ConditionRef& condition,
                              const DecodeConfig& cfg,
                              const std::map<size_t, int32_t>& pinned = {});

struct InpaintResult {
    std::vector<int32_t> tokens;
    bool noop = false; // empty region: input returned unchanged
    std::vector<size_t> masked_counts;
    size_t predictor_passes = 0;
};

// Regenerates the union of [a,b) regions, pinning everything else.
InpaintResult inpaint(const Predictor& pred, const std::vector<int32_t>& existing,
                      const std::vector<std::pair<size_t, size_t>>& regions,
                      const ConditionRef& condition, const DecodeConfig& cfg);

} // namespace momask
