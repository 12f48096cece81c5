#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "momask/matrix.hpp"
#include "momask/motion.hpp"
#include "momask/rng.hpp"

namespace momask {

struct RvqConfig {
    int num_residual_layers = 5; // V; total codebooks = V + 1
    int codebook_size = 512;     // N
    int code_dim = 0;            // d; 0 = derive from data at init
    double dropout_ratio = 0.2;  // q
    double ema_decay = 0.99;
    double dead_code_threshold = 0.01;
    double commitment_weight = 0.25; // diagnostic only, no gradients exist here

    void validate() const;
};

// One quantization layer. pinned_zero marks residual codebooks whose entry 0
// is held at the zero vector (never EMA-updated, never reset); that pin is
// what makes per-layer residual norms non-increasing.
struct Codebook {
    Matrix entries; // N x d
    std::vector<double> ema_counts;
    Matrix ema_sums;
    bool pinned_zero = false;

    size_t size() const { return entries.rows; }
    size_t dim() const { return entries.cols; }

    // fresh book with counts=1 and sums=entries (EMA fixed point)
    static Codebook from_entries(Matrix entries, bool pinned_zero = false);
};

struct CodebookStack {
    std::vector<Codebook> layers; // index 0 = base, 1..V = residual
    RvqConfig config;

    size_t layer_count() const { return layers.size(); }
    size_t code_dim() const { return layers.empty() ? 0 : layers[0].dim(); }
    void validate() const;

    std::string to_json() const;
    static CodebookStack from_json(const std::string& text);
};

// (V+1) x n grid of codebook indices; row v holds layer v's tokens.
struct TokenGrid {
    size_t layers = 0;
    size_t length = 0;
    std::vector<int32_t> idx;

    TokenGrid() = default;
    TokenGrid(size_t l, size_t n) : layers(l), length(n), idx(l * n, 0) {}
    int32_t& at(size_t layer, size_t t) { return idx[layer * length + t]; }
    int32_t at(size_t layer, size_t t) const { return idx[layer * length + t]; }
    std::vector<int32_t> row(size_t layer) const {
        return {idx.begin() + static_cast<long>(layer * length),
                idx.begin() + static_cast<long>((layer + 1) * length)};
    }

    std::string to_json() const;
    static TokenGrid from_json(const std::string& text);
};

// argmin over entries of squared Euclidean distance; ties -> lowest index
std::pair<int32_t, std::vector<double>> nearest_code(const Codebook& cb, std::span<const double> v);

struct EncodeResult {
    TokenGrid grid;                       // active_layers x n
    std::vector<Matrix> residual_inputs;  // r^v fed to each layer
    Matrix final_residual;                // what is left after the last layer
    std::vector<double> residual_mse;     // per-dim MSE of the residual after v layers, v = 0..active
};

// r^0 = latent; per layer: token = nearest_code(layer_v, r^v), r^{v+1} = r^v - code
EncodeResult rvq_encode(const CodebookStack& stack, const LatentSequence& lat, size_t active_layers);

// sum of selected code vectors over layers [0, up_to_layer)
LatentSequence rvq_decode(const CodebookStack& stack, const TokenGrid& grid, size_t up_to_layer,
                          size_t stride = 1);

// k-means++ (cap 50 Lloyd iterations) on the data for the base layer, then on
// the running residuals for each residual layer; residual books pin entry 0
// to the zero vector.
CodebookStack init_codebooks(const Matrix& data, const RvqConfig& cfg, uint64_t seed);

// quantization dropout: prob 1-q -> V+1 layers, prob q -> uniform in {1..V+1}
size_t sample_active_layers(double q, size_t num_residual_layers, Rng& rng);

// counts <- l*counts + (1-l)*n_k; sums likewise; entry = sums / max(counts, 1e-8).
// Codes with counts below dead_code_threshold are revived from a random
// assigned vector. vectors.row(i) is the input that got assignments[i].
void ema_update(Codebook& cb, std::span<const int32_t> assignments, const Matrix& vectors,
                double decay, double dead_code_threshold, Rng& rng);

struct RvqTrainLog {
    std::vector<double> epoch_mse;              // full-stack, per-dim
    std::vector<double> epoch_commit;           // commitment_weight * mse, diagnostic
    std::vector<std::vector<double>> epoch_perplexity; // per epoch, per layer
};

CodebookStack train_rvq(const std::vector<LatentSequence>& dataset, const RvqConfig& cfg,
                        int epochs, uint64_t seed, RvqTrainLog* log = nullptr);

// exp(entropy) of a usage histogram; 0*ln(0) = 0
double codebook_perplexity(std::span<const double> histogram);

} // namespace momask
