#pragma once

#include <cstdint>
#include <vector>

#include "momask/predictor.hpp"
#include "momask/rng.hpp"
#include "momask/rvq.hpp"

namespace momask {

// Per-position summary of layers < j: the exact partial-sum vector and its
// discretization through the base codebook (count models need discrete ids).
struct ResidualContext {
    Matrix vectors;              // n x d partial reconstructions
    std::vector<int32_t> ids;    // nearest base-layer code index per position
    int layer = 0;               // j
};

ResidualContext residual_context(const CodebookStack& stack, const TokenGrid& grid, int layer);

// Replaces a uniform floor(rho*n)-subset with random different tokens.
struct CorruptResult {
    std::vector<int32_t> tokens;
    std::vector<size_t> replaced;
};
CorruptResult rremask_corrupt(const std::vector<int32_t>& row, double rho, size_t vocab, Rng& rng);

struct ResidualTrainConfig {
    double alpha = 1.0;
    double replace_ratio = 0.2; // rho
    double uncond_drop = 0.1;
    int position_buckets = 8;

    void validate() const;
};

// One training example: a full-depth token grid plus its condition.
struct GridExample {
    TokenGrid grid;
    ConditionRef condition;
};

// Count model for layer j: corrupts the layer<j context tokens, recomputes
// the partial-sum context ids, then counts (ctx id, bucket, cond) -> true
// layer-j token. Layer 0 belongs to the masked decoder, not here.
CountModel train_residual(const std::vector<GridExample>& corpus, const CodebookStack& stack,
                          int layer, const ResidualTrainConfig& cfg, uint64_t seed);

// Rows 1..V in order, one argmax predictor pass per layer, CFG against the
// NULL condition at scale s. sample=true draws from the softmax instead.
TokenGrid progressive_decode(const Predictor& pred, const CodebookStack& stack,
                             const std::vector<int32_t>& base_row, const ConditionRef& condition,
                             double cfg_scale, Rng& rng, bool sample = false,
                             size_t* passes_out = nullptr);

} // namespace momask
