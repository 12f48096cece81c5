#include "momask/residual_gen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "momask/errors.hpp"
#include "momask/kernels.hpp"
#include "momask/masked_gen.hpp"

namespace momask {

ResidualContext residual_context(const CodebookStack& stack, const TokenGrid& grid, int layer) {
    if (layer < 1 || static_cast<size_t>(layer) >= stack.layer_count())
        throw std::invalid_argument("residual_context: layer outside [1,V]");
    if (grid.layers < static_cast<size_t>(layer))
        throw std::invalid_argument("residual_context: grid is missing rows below the layer");

    const size_t n = grid.length, d = stack.code_dim();
    ResidualContext ctx;
    ctx.layer = layer;
    ctx.vectors = Matrix(n, d);
    for (int v = 0; v < layer; ++v) {
        const auto& cb = stack.layers[static_cast<size_t>(v)];
        for (size_t i = 0; i < n; ++i) {
            int32_t tok = grid.at(static_cast<size_t>(v), i);
            if (tok < 0 || static_cast<size_t>(tok) >= cb.size())
                throw DataError("residual_context: token out of codebook range");
            auto code = cb.entries.row(static_cast<size_t>(tok));
            auto out = ctx.vectors.row(i);
            for (size_t c = 0; c < d; ++c) out[c] += code[c];
        }
    }

    ctx.ids.resize(n);
    std::vector<double> dist(n);
    assign_nearest(stack.layers[0].entries, ctx.vectors, ctx.ids, dist);
    return ctx;
}

CorruptResult rremask_corrupt(const std::vector<int32_t>& row, double rho, size_t vocab, Rng& rng) {
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rremask_corrupt: rho outside [0,1]");
    if (vocab < 1) throw std::invalid_argument("rremask_corrupt: empty vocab");

    CorruptResult res;
    res.tokens = row;
    const size_t n = row.size();
    const auto want = static_cast<size_t>(rho * static_cast<double>(n));
    if (want == 0) return res;

    std::vector<size_t> pos(n);
    for (size_t i = 0; i < n; ++i) pos[i] = i;
    for (size_t i = 0; i < want; ++i) {
        size_t j = i + static_cast<size_t>(rng.uniform_int(n - i));
        std::swap(pos[i], pos[j]);
    }
    pos.resize(want);
    std::sort(pos.begin(), pos.end());

    for (size_t p : pos) {
        auto tok = static_cast<int32_t>(rng.uniform_int(vocab));
        while (vocab > 1 && tok == res.tokens[p]) tok = static_cast<int32_t>(rng.uniform_int(vocab));
        res.tokens[p] = tok;
    }
    res.replaced = std::move(pos);
    return res;
}

void ResidualTrainConfig::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("residual: alpha must be > 0");
    if (replace_ratio < 0.0 || replace_ratio > 1.0)
        throw ConfigError("residual: replace_ratio must be in [0,1]");
    if (uncond_drop < 0.0 || uncond_drop > 1.0)
        throw ConfigError("residual: uncond_drop must be in [0,1]");
    if (position_buckets < 1) throw ConfigError("residual: position_buckets must be >= 1");
}

CountModel train_residual(const std::vector<GridExample>& corpus, const CodebookStack& stack,
                          int layer, const ResidualTrainConfig& cfg, uint64_t seed) {
    cfg.validate();
    if (layer < 1 || static_cast<size_t>(layer) >= stack.layer_count())
        throw std::invalid_argument("train_residual: layer outside [1,V]");
    if (corpus.empty()) throw std::invalid_argument("train_residual: empty corpus");

    const auto vocab = stack.layers[static_cast<size_t>(layer)].size();
    CountModel model;
    model.alpha = cfg.alpha;
    model.position_buckets = cfg.position_buckets;
    model.vocab = static_cast<int>(vocab);
    model.layer = layer;
    model.context_kind = CountModel::ContextKind::Partial;

    Rng rng(fnv1a64_u64(seed ^ static_cast<uint64_t>(layer)));
    for (const auto& example : corpus) {
        if (example.grid.layers <= static_cast<size_t>(layer))
            throw std::invalid_argument("train_residual: grid lacks the target layer row");
        const size_t n = example.grid.length;
        if (n == 0) continue;

        // corrupt the context rows, never the targets
        TokenGrid noisy = example.grid;
        for (int v = 0; v < layer; ++v) {
            auto row = example.grid.row(static_cast<size_t>(v));
            auto corrupted =
                rremask_corrupt(row, cfg.replace_ratio, stack.layers[static_cast<size_t>(v)].size(), rng);
            for (size_t i = 0; i < n; ++i) noisy.at(static_cast<size_t>(v), i) = corrupted.tokens[i];
        }
        ResidualContext ctx = residual_context(stack, noisy, layer);

        const int32_t cond_id = example.condition.table_id();
        auto targets = example.grid.row(static_cast<size_t>(layer));
        bool also_null = !example.condition.is_null() &&
                         uncond_drop_decision(targets, cond_id, cfg.uncond_drop, seed);
        for (size_t t = 0; t < n; ++t) {
            int bucket = model.bucket_of(t, n);
            model.add_count({ctx.ids[t], kPartialCtx, bucket, cond_id}, targets[t]);
            if (also_null) model.add_count({ctx.ids[t], kPartialCtx, bucket, kNullCondition}, targets[t]);
        }
    }
    return model;
}

TokenGrid progressive_decode(const Predictor& pred, const CodebookStack& stack,
                             const std::vector<int32_t>& base_row, const ConditionRef& condition,
                             double cfg_scale, Rng& rng, bool sample, size_t* passes_out) {
    const size_t n = base_row.size();
    const size_t depth = stack.layer_count();
    const auto base_vocab = stack.layers[0].size();
    for (int32_t t : base_row)
        if (t < 0 || static_cast<size_t>(t) >= base_vocab)
            throw std::invalid_argument("progressive_decode: base row not fully committed");

    TokenGrid grid(depth, n);
    for (size_t i = 0; i < n; ++i) grid.at(0, i) = base_row[i];

    size_t passes = 0;
    for (size_t j = 1; j < depth; ++j) {
        ResidualContext ctx = residual_context(stack, grid, static_cast<int>(j));
        Matrix logits = pred.predict_logits(ctx.ids, condition, static_cast<int>(j));
        if (!condition.is_null()) {
            // with a null condition the combination cancels exactly, skip it
            Matrix uncond = pred.predict_logits(ctx.ids, ConditionRef::null(), static_cast<int>(j));
            logits = cfg_logits(logits, uncond, cfg_scale);
        }
        passes += 1;
        const auto vocab = stack.layers[j].size();
        if (logits.rows != n || logits.cols != vocab)
            throw ModelError("progressive_decode: predictor output shape mismatch");

        for (size_t i = 0; i < n; ++i) {
            auto row = logits.row(i);
            size_t tok = 0;
            if (sample) {
                double mx = row[0];
                for (double v : row) mx = std::max(mx, v);
                std::vector<double> p(row.size());
                double sum = 0.0;
                for (size_t k = 0; k < p.size(); ++k) {
                    p[k] = std::exp(row[k] - mx);
                    sum += p[k];
                }
                for (auto& v : p) v /= sum;
                tok = rng.categorical(p);
            } else {
                for (size_t k = 1; k < row.size(); ++k)
                    if (row[k] > row[tok]) tok = k;
            }
            grid.at(j, i) = static_cast<int32_t>(tok);
        }
    }
    if (passes_out) *passes_out = passes;
    return grid;
}

} // namespace momask
