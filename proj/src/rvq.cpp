#include "momask/rvq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "momask/errors.hpp"
#include "momask/json_util.hpp"
#include "momask/kernels.hpp"
#include "momask/kmeans.hpp"
#include "momask/log.hpp"

namespace momask {

using nlohmann::json;

void RvqConfig::validate() const {
    if (num_residual_layers < 0) throw ConfigError("rvq: num_residual_layers must be >= 0");
    if (codebook_size < 1) throw ConfigError("rvq: codebook_size must be >= 1");
    if (code_dim < 0) throw ConfigError("rvq: code_dim must be >= 0");
    if (dropout_ratio < 0.0 || dropout_ratio > 1.0)
        throw ConfigError("rvq: dropout_ratio must be in [0,1]");
    if (!(ema_decay > 0.0 && ema_decay < 1.0))
        throw ConfigError("rvq: ema_decay must be in (0,1)");
    if (dead_code_threshold < 0.0) throw ConfigError("rvq: dead_code_threshold must be >= 0");
    if (commitment_weight < 0.0) throw ConfigError("rvq: commitment_weight must be >= 0");
}

Codebook Codebook::from_entries(Matrix entries, bool pinned_zero) {
    Codebook cb;
    cb.ema_counts.assign(entries.rows, 1.0);
    cb.ema_sums = entries;
    cb.entries = std::move(entries);
    cb.pinned_zero = pinned_zero;
    return cb;
}

void CodebookStack::validate() const {
    config.validate();
    if (layers.size() != static_cast<size_t>(config.num_residual_layers) + 1)
        throw ModelError("stack: layer count != num_residual_layers + 1");
    for (const auto& cb : layers) {
        if (cb.size() < 1) throw ModelError("stack: empty codebook");
        if (cb.dim() != code_dim()) throw ModelError("stack: layers disagree on code_dim");
        if (!cb.entries.all_finite()) throw ModelError("stack: non-finite codebook entry");
    }
}

std::pair<int32_t, std::vector<double>> nearest_code(const Codebook& cb, std::span<const double> v) {
    int32_t idx = nearest_index(cb.entries, v);
    auto row = cb.entries.row(static_cast<size_t>(idx));
    return {idx, std::vector<double>(row.begin(), row.end())};
}

EncodeResult rvq_encode(const CodebookStack& stack, const LatentSequence& lat, size_t active_layers) {
    if (active_layers < 1 || active_layers > stack.layer_count())
        throw std::invalid_argument("rvq_encode: active_layers out of range");
    if (lat.dim() != stack.code_dim())
        throw std::invalid_argument("rvq_encode: latent dim != code_dim");

    const size_t n = lat.length(), d = lat.dim();
    EncodeResult res;
    res.grid = TokenGrid(active_layers, n);
    res.residual_inputs.reserve(active_layers);

    Matrix r = lat.codes;
    std::vector<int32_t> tokens(n);
    std::vector<double> dist(n);
    auto mean_sq = [&](const Matrix& m) {
        double s = 0.0;
        for (double v : m.data) s += v * v;
        return m.data.empty() ? 0.0 : s / static_cast<double>(m.data.size());
    };

    res.residual_mse.push_back(mean_sq(r));
    for (size_t v = 0; v < active_layers; ++v) {
        res.residual_inputs.push_back(r);
        assign_nearest(stack.layers[v].entries, r, tokens, dist);
        for (size_t i = 0; i < n; ++i) {
            res.grid.at(v, i) = tokens[i];
            auto code = stack.layers[v].entries.row(static_cast<size_t>(tokens[i]));
            auto ri = r.row(i);
            for (size_t c = 0; c < d; ++c) ri[c] -= code[c];
        }
        res.residual_mse.push_back(mean_sq(r));
    }
    res.final_residual = std::move(r);
    return res;
}

LatentSequence rvq_decode(const CodebookStack& stack, const TokenGrid& grid, size_t up_to_layer,
                          size_t stride) {
    if (up_to_layer > grid.layers)
        throw std::invalid_argument("rvq_decode: up_to_layer exceeds grid rows");
    if (grid.layers > stack.layer_count())
        throw std::invalid_argument("rvq_decode: grid has more rows than stack layers");

    const size_t n = grid.length, d = stack.code_dim();
    LatentSequence out;
    out.stride = stride;
    out.codes = Matrix(n, d);
    for (size_t v = 0; v < up_to_layer; ++v) {
        const auto& cb = stack.layers[v];
        for (size_t i = 0; i < n; ++i) {
            int32_t tok = grid.at(v, i);
            if (tok < 0 || static_cast<size_t>(tok) >= cb.size())
                throw DataError("rvq_decode: index out of codebook range");
            auto code = cb.entries.row(static_cast<size_t>(tok));
            auto oi = out.codes.row(i);
            for (size_t c = 0; c < d; ++c) oi[c] += code[c];
        }
    }
    return out;
}

CodebookStack init_codebooks(const Matrix& data, const RvqConfig& cfg, uint64_t seed) {
    cfg.validate();
    if (data.rows == 0) throw std::invalid_argument("init_codebooks: empty data");
    if (cfg.code_dim > 0 && static_cast<size_t>(cfg.code_dim) != data.cols)
        throw std::invalid_argument("init_codebooks: data dim != config code_dim");

    const size_t n_codes = static_cast<size_t>(cfg.codebook_size);
    const size_t d = data.cols;
    Rng rng(seed);

    CodebookStack stack;
    stack.config = cfg;
    stack.config.code_dim = static_cast<int>(d);

    Matrix residual = data;
    std::vector<int32_t> tokens(data.rows);
    std::vector<double> dist(data.rows);

    for (size_t v = 0; v <= static_cast<size_t>(cfg.num_residual_layers); ++v) {
        Matrix entries(n_codes, d);
        bool pinned = v > 0;
        if (pinned) {
            // entry 0 stays the zero vector; cluster the rest
            if (n_codes > 1) {
                KMeansResult km = kmeans(residual, n_codes - 1, rng, 50);
                for (size_t k = 0; k + 1 < n_codes; ++k)
                    std::copy_n(km.centroids.row(k).data(), d, entries.row(k + 1).data());
            }
        } else {
            KMeansResult km = kmeans(residual, n_codes, rng, 50);
            entries = std::move(km.centroids);
        }

        Codebook cb = Codebook::from_entries(std::move(entries), pinned);
        assign_nearest(cb.entries, residual, tokens, dist);
        std::vector<double> counts(n_codes, 0.0);
        for (int32_t t : tokens) counts[static_cast<size_t>(t)] += 1.0;
        for (size_t k = 0; k < n_codes; ++k) {
            cb.ema_counts[k] = std::max(counts[k], 1.0);
            auto s = cb.ema_sums.row(k);
            auto e = cb.entries.row(k);
            for (size_t c = 0; c < d; ++c) s[c] = e[c] * cb.ema_counts[k];
        }
        for (size_t i = 0; i < residual.rows; ++i) {
            auto code = cb.entries.row(static_cast<size_t>(tokens[i]));
            auto ri = residual.row(i);
            for (size_t c = 0; c < d; ++c) ri[c] -= code[c];
        }
        stack.layers.push_back(std::move(cb));
    }
    return stack;
}

size_t sample_active_layers(double q, size_t num_residual_layers, Rng& rng) {
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("sample_active_layers: q outside [0,1]");
    const size_t full = num_residual_layers + 1;
    if (rng.uniform() < q) return 1 + static_cast<size_t>(rng.uniform_int(full));
    return full;
}

void ema_update(Codebook& cb, std::span<const int32_t> assignments, const Matrix& vectors,
                double decay, double dead_code_threshold, Rng& rng) {
    if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("ema_update: decay outside (0,1)");
    if (assignments.size() != vectors.rows)
        throw std::invalid_argument("ema_update: assignments/vectors size mismatch");

    const size_t n_codes = cb.size(), d = cb.dim();
    std::vector<double> batch_counts(n_codes, 0.0);
    Matrix batch_sums(n_codes, d);
    for (size_t i = 0; i < assignments.size(); ++i) {
        auto k = static_cast<size_t>(assignments[i]);
        if (k >= n_codes) throw std::invalid_argument("ema_update: assignment index out of range");
        batch_counts[k] += 1.0;
        auto s = batch_sums.row(k);
        auto v = vectors.row(i);
        for (size_t c = 0; c < d; ++c) s[c] += v[c];
    }

    const size_t first = cb.pinned_zero ? 1 : 0;
    for (size_t k = first; k < n_codes; ++k) {
        cb.ema_counts[k] = decay * cb.ema_counts[k] + (1.0 - decay) * batch_counts[k];
        auto sums = cb.ema_sums.row(k);
        auto bs = batch_sums.row(k);
        auto e = cb.entries.row(k);
        for (size_t c = 0; c < d; ++c) {
            sums[c] = decay * sums[c] + (1.0 - decay) * bs[c];
            e[c] = sums[c] / std::max(cb.ema_counts[k], 1e-8);
        }
    }

    if (vectors.rows == 0) return; // nothing to revive from
    for (size_t k = first; k < n_codes; ++k) {
        if (cb.ema_counts[k] >= dead_code_threshold) continue;
        auto donor = vectors.row(static_cast<size_t>(rng.uniform_int(vectors.rows)));
        auto e = cb.entries.row(k);
        auto s = cb.ema_sums.row(k);
        for (size_t c = 0; c < d; ++c) {
            e[c] = donor[c];
            s[c] = donor[c];
        }
        cb.ema_counts[k] = 1.0;
    }
}

CodebookStack train_rvq(const std::vector<LatentSequence>& dataset, const RvqConfig& cfg,
                        int epochs, uint64_t seed, RvqTrainLog* log) {
    cfg.validate();
    if (dataset.empty()) throw std::invalid_argument("train_rvq: empty dataset");
    if (epochs < 1) throw std::invalid_argument("train_rvq: epochs must be >= 1");

    size_t total_rows = 0;
    for (const auto& lat : dataset) {
        if (lat.dim() != dataset.front().dim())
            throw std::invalid_argument("train_rvq: inconsistent latent dims");
        total_rows += lat.length();
    }
    Matrix all(total_rows, dataset.front().dim());
    size_t at = 0;
    for (const auto& lat : dataset) {
        std::copy(lat.codes.data.begin(), lat.codes.data.end(), all.data.begin() + static_cast<long>(at));
        at += lat.codes.data.size();
    }

    CodebookStack stack = init_codebooks(all, cfg, seed);
    const size_t full = stack.layer_count();
    Rng rng(fnv1a64_u64(seed ^ 0x7261696e)); // separate stream from init

    std::vector<size_t> order(dataset.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t si : order) {
            size_t active = sample_active_layers(cfg.dropout_ratio, full - 1, rng);
            EncodeResult enc = rvq_encode(stack, dataset[si], active);
            for (size_t v = 0; v < active; ++v) {
                auto row = enc.grid.row(v);
                ema_update(stack.layers[v], row, enc.residual_inputs[v], cfg.ema_decay,
                           cfg.dead_code_threshold, rng);
            }
        }

        if (log) {
            double sum_sq = 0.0;
            size_t count = 0;
            std::vector<std::vector<double>> hist(full,
                                                  std::vector<double>(stack.layers[0].size(), 0.0));
            for (const auto& lat : dataset) {
                EncodeResult enc = rvq_encode(stack, lat, full);
                for (double vv : enc.final_residual.data) sum_sq += vv * vv;
                count += enc.final_residual.data.size();
                for (size_t v = 0; v < full; ++v)
                    for (size_t i = 0; i < enc.grid.length; ++i)
                        hist[v][static_cast<size_t>(enc.grid.at(v, i))] += 1.0;
            }
            double mse = sum_sq / static_cast<double>(count);
            log->epoch_mse.push_back(mse);
            log->epoch_commit.push_back(cfg.commitment_weight * mse);
            std::vector<double> perp;
            for (size_t v = 0; v < full; ++v) perp.push_back(codebook_perplexity(hist[v]));
            log->epoch_perplexity.push_back(std::move(perp));
            log::debug("rvq epoch ", epoch, " mse ", mse);
        }
    }
    return stack;
}

double codebook_perplexity(std::span<const double> histogram) {
    double total = 0.0;
    for (double c : histogram) {
        if (c < 0.0) throw std::invalid_argument("codebook_perplexity: negative count");
        total += c;
    }
    if (total < 1.0) throw std::invalid_argument("codebook_perplexity: histogram sums to < 1");
    double entropy = 0.0;
    for (double c : histogram) {
        if (c == 0.0) continue;
        double p = c / total;
        entropy -= p * std::log(p);
    }
    return std::exp(entropy);
}

namespace {

json codebook_to_json(const Codebook& cb) {
    json j;
    j["pinned_zero"] = cb.pinned_zero;
    j["entries"] = matrix_to_json(cb.entries);
    j["ema_counts"] = cb.ema_counts;
    j["ema_sums"] = matrix_to_json(cb.ema_sums);
    return j;
}

Codebook codebook_from_json(const json& j) {
    Codebook cb;
    cb.pinned_zero = j.at("pinned_zero").get<bool>();
    cb.entries = matrix_from_json(j.at("entries"));
    cb.ema_counts = j.at("ema_counts").get<std::vector<double>>();
    cb.ema_sums = matrix_from_json(j.at("ema_sums"));
    if (cb.ema_counts.size() != cb.entries.rows || !cb.ema_sums.same_shape(cb.entries))
        throw FormatError("codebook JSON: inconsistent shapes");
    return cb;
}

json rvq_config_to_json(const RvqConfig& c) {
    return json{{"num_residual_layers", c.num_residual_layers},
                {"codebook_size", c.codebook_size},
                {"code_dim", c.code_dim},
                {"dropout_ratio", c.dropout_ratio},
                {"ema_decay", c.ema_decay},
                {"dead_code_threshold", c.dead_code_threshold},
                {"commitment_weight", c.commitment_weight}};
}

RvqConfig rvq_config_from_json(const json& j) {
    RvqConfig c;
    c.num_residual_layers = j.at("num_residual_layers").get<int>();
    c.codebook_size = j.at("codebook_size").get<int>();
    c.code_dim = j.at("code_dim").get<int>();
    c.dropout_ratio = j.at("dropout_ratio").get<double>();
    c.ema_decay = j.at("ema_decay").get<double>();
    c.dead_code_threshold = j.at("dead_code_threshold").get<double>();
    c.commitment_weight = j.at("commitment_weight").get<double>();
    return c;
}

} // namespace

std::string CodebookStack::to_json() const {
    json j;
    j["config"] = rvq_config_to_json(config);
    json layers_j = json::array();
    for (const auto& cb : layers) layers_j.push_back(codebook_to_json(cb));
    j["layers"] = std::move(layers_j);
    return j.dump(2);
}

CodebookStack CodebookStack::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("stack JSON: ") + e.what());
    }
    CodebookStack stack;
    try {
        stack.config = rvq_config_from_json(j.at("config"));
        for (const auto& lj : j.at("layers")) stack.layers.push_back(codebook_from_json(lj));
    } catch (const json::exception& e) {
        throw FormatError(std::string("stack JSON: ") + e.what());
    }
    stack.validate();
    return stack;
}

std::string TokenGrid::to_json() const {
    json rows = json::array();
    for (size_t v = 0; v < layers; ++v) rows.push_back(row(v));
    return json{{"tokens", rows}}.dump();
}

TokenGrid TokenGrid::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("token JSON: ") + e.what());
    }
    const auto& rows = j.at("tokens");
    TokenGrid grid;
    grid.layers = rows.size();
    grid.length = grid.layers > 0 ? rows[0].size() : 0;
    for (const auto& row : rows) {
        if (row.size() != grid.length) throw FormatError("token JSON: ragged rows");
        for (const auto& v : row) grid.idx.push_back(v.get<int32_t>());
    }
    return grid;
}

} // namespace momask
