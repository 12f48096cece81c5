#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "momask/matrix.hpp"

namespace momask {

// Sentinels live below 0 so real tokens keep the whole [0, N) range.
inline constexpr int32_t kMaskToken = -1;
inline constexpr int32_t kBosToken = -2;
inline constexpr int32_t kEosToken = -3;
inline constexpr int32_t kPartialCtx = -4; // right-slot filler for partial-sum contexts
inline constexpr int32_t kNullCondition = -1;

// Discrete label, raw vector, or nothing. Count tables need a discrete id,
// so vector conditions are folded to one by content hash.
struct ConditionRef {
    enum class Kind { Null, Label, Vector };
    Kind kind = Kind::Null;
    int32_t label = kNullCondition;
    std::vector<double> vec;

    static ConditionRef null() { return {}; }
    static ConditionRef label_id(int32_t id);
    static ConditionRef vector(std::vector<double> v);

    bool is_null() const { return kind == Kind::Null; }
    int32_t table_id() const;
};

// Token-probability model consumed by the decoders. Rows for unmasked
// positions are computed anyway; callers ignore them.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual size_t vocab() const = 0;
    // tokens: n entries in [0,N) or kMaskToken. Returns n x N logits.
    virtual Matrix predict_logits(const std::vector<int32_t>& tokens, const ConditionRef& cond,
                                  int layer) const = 0;
};

// Fixed per-position categorical tables, one per condition id. Logits are
// ln(p) regardless of the mask pattern, which makes brute-force verification
// of the decoders possible.
class OraclePredictor : public Predictor {
public:
    // each table is n x N of probabilities; rows must sum to 1 within 1e-9
    OraclePredictor(std::map<int32_t, Matrix> tables, size_t vocab);

    size_t vocab() const override { return vocab_; }
    Matrix predict_logits(const std::vector<int32_t>& tokens, const ConditionRef& cond,
                          int layer) const override;

private:
    std::map<int32_t, Matrix> tables_;
    size_t vocab_ = 0;
};

// Laplace-smoothed sparse count tables over (left, right, bucket, cond) keys.
// Neighbor kind keys on the nearest unmasked tokens to either side; Partial
// kind treats the input row as precomputed context ids (residual layers).
class CountModel {
public:
    enum class ContextKind { Neighbor, Partial };
    using Key = std::array<int32_t, 4>; // left, right, bucket, cond

    double alpha = 1.0;
    int position_buckets = 8;
    int vocab = 0;
    int layer = 0;
    ContextKind context_kind = ContextKind::Neighbor;

    std::map<Key, std::vector<double>> tables;
    std::map<int32_t, std::vector<double>> marginals; // per condition id

    void add_count(const Key& key, int32_t token, double weight = 1.0);
    // (count_k + a) / (total + a*N); unseen context falls back to the
    // (cond, layer) marginal, and an empty marginal is uniform.
    std::vector<double> logits_for(const Key& key, int32_t cond) const;
    Matrix predict_logits(const std::vector<int32_t>& tokens, const ConditionRef& cond) const;

    int bucket_of(size_t t, size_t n) const;

    std::string to_json() const;
    static CountModel from_json(const std::string& text);
};

struct CountTrainConfig {
    double alpha = 1.0;
    double uncond_drop = 0.1;
    int position_buckets = 8;
    int vocab = 0; // required

    void validate() const;
};

using LabeledRow = std::pair<std::vector<int32_t>, ConditionRef>;

// Counts every position's true token under its true-neighbor context. With
// probability uncond_drop the whole example is counted again under the NULL
// condition; the decision is a content-hash Bernoulli so tables are
// invariant to corpus order.
CountModel train_count_predictor(const std::vector<LabeledRow>& corpus, int layer,
                                 const CountTrainConfig& cfg, uint64_t seed);

bool uncond_drop_decision(const std::vector<int32_t>& tokens, int32_t cond_id, double drop,
                          uint64_t seed);

// Predictor over one CountModel per layer.
class CountPredictor : public Predictor {
public:
    std::map<int, CountModel> models;

    size_t vocab() const override;
    Matrix predict_logits(const std::vector<int32_t>& tokens, const ConditionRef& cond,
                          int layer) const override;

    std::string to_json() const;
    static CountPredictor from_json(const std::string& text);
};

} // namespace momask
