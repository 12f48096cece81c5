#include "momask/masked_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "momask/errors.hpp"

namespace momask {

MaskSchedule parse_schedule(const std::string& name) {
    if (name == "cosine") return MaskSchedule::Cosine;
    if (name == "linear") return MaskSchedule::Linear;
    throw ConfigError("unknown mask schedule: " + name);
}

const char* schedule_name(MaskSchedule s) {
    return s == MaskSchedule::Cosine ? "cosine" : "linear";
}

double mask_ratio(double tau) {
    if (tau < 0.0 || tau > 1.0) throw std::domain_error("mask_ratio: tau outside [0,1]");
    return std::cos(std::numbers::pi * tau / 2.0);
}

double schedule_ratio(MaskSchedule schedule, double tau) {
    if (schedule == MaskSchedule::Linear) {
        if (tau < 0.0 || tau > 1.0) throw std::domain_error("mask_ratio: tau outside [0,1]");
        return 1.0 - tau;
    }
    return mask_ratio(tau);
}

std::vector<size_t> sample_training_mask(size_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_training_mask: n must be >= 1");
    double tau = rng.uniform();
    auto want = static_cast<size_t>(
        std::max<long long>(1, std::llround(static_cast<double>(n) * mask_ratio(tau))));
    want = std::min(want, n);

    std::vector<size_t> pos(n);
    for (size_t i = 0; i < n; ++i) pos[i] = i;
    // partial Fisher-Yates: the first `want` entries are a uniform subset
    for (size_t i = 0; i < want; ++i) {
        size_t j = i + static_cast<size_t>(rng.uniform_int(n - i));
        std::swap(pos[i], pos[j]);
    }
    pos.resize(want);
    std::sort(pos.begin(), pos.end());
    return pos;
}

Matrix cfg_logits(const Matrix& cond, const Matrix& uncond, double s) {
    if (!cond.same_shape(uncond)) throw std::invalid_argument("cfg_logits: shape mismatch");
    Matrix out(cond.rows, cond.cols);
    // c + s*(c-u), algebraically (1+s)c - su; this grouping keeps s=0 and
    // cond==uncond exact instead of merely close
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = cond.data[i] + s * (cond.data[i] - uncond.data[i]);
    return out;
}

void DecodeConfig::validate() const {
    if (iterations < 1) throw ConfigError("decode: iterations must be >= 1");
    if (cfg_scale < 0.0) throw ConfigError("decode: cfg_scale must be >= 0");
    if (temperature < 0.0) throw ConfigError("decode: temperature must be >= 0");
}

namespace {

// softmax of one logits row; returns probabilities
std::vector<double> softmax_row(std::span<const double> logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (size_t k = 0; k < p.size(); ++k) {
        p[k] = std::exp(logits[k] - mx);
        sum += p[k];
    }
    for (auto& v : p) v /= sum;
    return p;
}

size_t argmax_row(std::span<const double> logits) {
    size_t best = 0;
    for (size_t k = 1; k < logits.size(); ++k)
        if (logits[k] > logits[best]) best = k;
    return best;
}

} // namespace

DecodeResult iterative_decode(const Predictor& pred, size_t n, const ConditionRef& condition,
                              const DecodeConfig& cfg, const std::map<size_t, int32_t>& pinned) {
    cfg.validate();
    if (n < 1) throw std::invalid_argument("iterative_decode: n must be >= 1");
    const size_t vocab = pred.vocab();
    for (const auto& [pos, tok] : pinned) {
        if (pos >= n) throw std::invalid_argument("iterative_decode: pinned position out of range");
        if (tok < 0 || static_cast<size_t>(tok) >= vocab)
            throw std::invalid_argument("iterative_decode: pinned token out of range");
    }

    DecodeResult res;
    res.tokens.assign(n, kMaskToken);
    std::vector<char> committed(n, 0);
    for (const auto& [pos, tok] : pinned) {
        res.tokens[pos] = tok;
        committed[pos] = 1;
    }
    const size_t n_free = n - pinned.size();
    const int big_l = cfg.iterations;
    Rng rng(cfg.seed);

    for (int l = 1; l <= big_l; ++l) {
        size_t m_l = 0;
        if (l < big_l) {
            double ratio = schedule_ratio(cfg.schedule, static_cast<double>(l) / big_l);
            m_l = static_cast<size_t>(std::ceil(static_cast<double>(n_free) * ratio));
            m_l = std::min(m_l, n_free);
        }

        std::vector<size_t> masked;
        for (size_t i = 0; i < n; ++i)
            if (!committed[i]) masked.push_back(i);

        if (!masked.empty()) {
            Matrix logits = pred.predict_logits(res.tokens, condition, 0);
            if (!cfg.cond_only) {
                Matrix uncond = pred.predict_logits(res.tokens, ConditionRef::null(), 0);
                logits = cfg_logits(logits, uncond, cfg.cfg_scale);
            }
            res.predictor_passes += 1;
            if (logits.rows != n || logits.cols != vocab)
                throw ModelError("iterative_decode: predictor output shape mismatch");

            double tau_l = cfg.temperature * (1.0 - static_cast<double>(l) / big_l);
            std::vector<int32_t> sampled(masked.size());
            std::vector<double> conf(masked.size());
            for (size_t c = 0; c < masked.size(); ++c) {
                auto probs = softmax_row(logits.row(masked[c]));
                size_t tok = cfg.greedy ? argmax_row(logits.row(masked[c]))
                                        : rng.categorical(probs);
                sampled[c] = static_cast<int32_t>(tok);
                conf[c] = std::log(std::max(probs[tok], 1e-300)) + tau_l * rng.gumbel();
            }

            // keep exactly m_l masked: commit the strongest of the rest
            std::vector<size_t> order(masked.size());
            for (size_t c = 0; c < order.size(); ++c) order[c] = c;
            std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                if (conf[a] != conf[b]) return conf[a] > conf[b];
                return masked[a] < masked[b];
            });
            size_t to_commit = masked.size() > m_l ? masked.size() - m_l : 0;
            for (size_t c = 0; c < to_commit; ++c) {
                size_t pos = masked[order[c]];
                res.tokens[pos] = sampled[order[c]];
                committed[pos] = 1;
            }
        }

        size_t still_masked = 0;
        for (size_t i = 0; i < n; ++i)
            if (!committed[i]) ++still_masked;
        res.masked_counts.push_back(still_masked);
    }

    for (int32_t t : res.tokens)
        if (t == kMaskToken) throw ModelError("iterative_decode: masked position survived");
    return res;
}

InpaintResult inpaint(const Predictor& pred, const std::vector<int32_t>& existing,
                      const std::vector<std::pair<size_t, size_t>>& regions,
                      const ConditionRef& condition, const DecodeConfig& cfg) {
    const size_t n = existing.size();
    if (n < 1) throw std::invalid_argument("inpaint: empty sequence");

    std::vector<char> in_region(n, 0);
    for (const auto& [a, b] : regions) {
        if (a >= b || b > n) throw DataError("inpaint: region outside [0,n)");
        for (size_t i = a; i < b; ++i) in_region[i] = 1;
    }

    InpaintResult out;
    if (std::none_of(in_region.begin(), in_region.end(), [](char c) { return c != 0; })) {
        out.tokens = existing;
        out.noop = true;
        return out;
    }

    std::map<size_t, int32_t> pinned;
    for (size_t i = 0; i < n; ++i)
        if (!in_region[i]) {
            if (existing[i] == kMaskToken)
                throw DataError("inpaint: masked token outside the regeneration region");
            pinned.emplace(i, existing[i]);
        }
    DecodeResult dec = iterative_decode(pred, n, condition, cfg, pinned);
    out.tokens = std::move(dec.tokens);
    out.masked_counts = std::move(dec.masked_counts);
    out.predictor_passes = dec.predictor_passes;
    return out;
}

} // namespace momask
