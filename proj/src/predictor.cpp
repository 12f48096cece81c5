#include "momask/predictor.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "momask/errors.hpp"
#include "momask/json_util.hpp"
#include "momask/rng.hpp"

namespace momask {

using nlohmann::json;

ConditionRef ConditionRef::label_id(int32_t id) {
    if (id < 0) throw std::invalid_argument("condition: label ids must be >= 0");
    ConditionRef c;
    c.kind = Kind::Label;
    c.label = id;
    return c;
}

ConditionRef ConditionRef::vector(std::vector<double> v) {
    ConditionRef c;
    c.kind = Kind::Vector;
    c.vec = std::move(v);
    return c;
}

int32_t ConditionRef::table_id() const {
    switch (kind) {
        case Kind::Null: return kNullCondition;
        case Kind::Label: return label;
        case Kind::Vector: {
            uint64_t h = fnv1a64(vec.data(), vec.size() * sizeof(double));
            return static_cast<int32_t>(h & 0x7fffffff);
        }
    }
    return kNullCondition;
}

OraclePredictor::OraclePredictor(std::map<int32_t, Matrix> tables, size_t vocab)
    : tables_(std::move(tables)), vocab_(vocab) {
    if (vocab_ == 0 || tables_.empty()) throw ModelError("oracle: empty table set");
    for (const auto& [id, table] : tables_) {
        if (table.cols != vocab_) throw ModelError("oracle: table width != vocab");
        for (size_t t = 0; t < table.rows; ++t) {
            double sum = 0.0;
            for (size_t k = 0; k < vocab_; ++k) {
                if (table(t, k) < 0.0) throw ModelError("oracle: negative probability");
                sum += table(t, k);
            }
            if (std::abs(sum - 1.0) > 1e-9) throw ModelError("oracle: unnormalized row");
        }
    }
}

Matrix OraclePredictor::predict_logits(const std::vector<int32_t>& tokens, const ConditionRef& cond,
                                       int) const {
    auto it = tables_.find(cond.table_id());
    if (it == tables_.end()) it = tables_.find(kNullCondition);
    if (it == tables_.end()) throw ModelError("oracle: unknown condition");
    const Matrix& table = it->second;
    if (tokens.size() != table.rows) throw ModelError("oracle: sequence length != table rows");

    Matrix logits(table.rows, vocab_);
    for (size_t i = 0; i < logits.data.size(); ++i)
        logits.data[i] = std::log(std::max(table.data[i], 1e-300));
    return logits;
}

void CountModel::add_count(const Key& key, int32_t token, double weight) {
    if (token < 0 || token >= vocab) throw std::invalid_argument("count model: token out of range");
    auto& counts = tables[key];
    if (counts.empty()) counts.assign(static_cast<size_t>(vocab), 0.0);
    counts[static_cast<size_t>(token)] += weight;
    auto& marg = marginals[key[3]];
    if (marg.empty()) marg.assign(static_cast<size_t>(vocab), 0.0);
    marg[static_cast<size_t>(token)] += weight;
}

std::vector<double> CountModel::logits_for(const Key& key, int32_t cond) const {
    const std::vector<double>* counts = nullptr;
    if (auto it = tables.find(key); it != tables.end()) counts = &it->second;
    else if (auto mt = marginals.find(cond); mt != marginals.end()) counts = &mt->second;

    const size_t n = static_cast<size_t>(vocab);
    std::vector<double> logits(n);
    double total = 0.0;
    if (counts)
        for (double c : *counts) total += c;
    double denom = total + alpha * static_cast<double>(vocab);
    for (size_t k = 0; k < n; ++k) {
        double c = counts ? (*counts)[k] : 0.0;
        logits[k] = std::log((c + alpha) / denom);
    }
    return logits;
}

int CountModel::bucket_of(size_t t, size_t n) const {
    return static_cast<int>(static_cast<size_t>(position_buckets) * t / n);
}

Matrix CountModel::predict_logits(const std::vector<int32_t>& tokens, const ConditionRef& cond) const {
    const size_t n = tokens.size();
    if (n == 0) throw std::invalid_argument("count model: empty sequence");
    const int32_t cond_id = cond.table_id();

    Matrix logits(n, static_cast<size_t>(vocab));
    for (size_t t = 0; t < n; ++t) {
        Key key;
        if (context_kind == ContextKind::Partial) {
            key = {tokens[t], kPartialCtx, bucket_of(t, n), cond_id};
        } else {
            int32_t left = kBosToken, right = kEosToken;
            for (size_t j = t; j-- > 0;)
                if (tokens[j] != kMaskToken) { left = tokens[j]; break; }
            for (size_t j = t + 1; j < n; ++j)
                if (tokens[j] != kMaskToken) { right = tokens[j]; break; }
            key = {left, right, bucket_of(t, n), cond_id};
        }
        auto row = logits_for(key, cond_id);
        std::copy(row.begin(), row.end(), logits.row(t).begin());
    }
    return logits;
}

void CountTrainConfig::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("predictor: alpha must be > 0");
    if (uncond_drop < 0.0 || uncond_drop > 1.0)
        throw ConfigError("predictor: uncond_drop must be in [0,1]");
    if (position_buckets < 1) throw ConfigError("predictor: position_buckets must be >= 1");
    if (vocab < 1) throw ConfigError("predictor: vocab must be >= 1");
}

bool uncond_drop_decision(const std::vector<int32_t>& tokens, int32_t cond_id, double drop,
                          uint64_t seed) {
    // hash, not a sequential draw, so the decision rides with the example
    // and tables stay order-invariant
    uint64_t h = fnv1a64(tokens.data(), tokens.size() * sizeof(int32_t));
    h = fnv1a64_u64(h ^ static_cast<uint64_t>(static_cast<uint32_t>(cond_id)));
    h = fnv1a64_u64(h ^ seed);
    double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u < drop;
}

CountModel train_count_predictor(const std::vector<LabeledRow>& corpus, int layer,
                                 const CountTrainConfig& cfg, uint64_t seed) {
    cfg.validate();
    if (corpus.empty()) throw std::invalid_argument("train_count_predictor: empty corpus");

    CountModel model;
    model.alpha = cfg.alpha;
    model.position_buckets = cfg.position_buckets;
    model.vocab = cfg.vocab;
    model.layer = layer;

    for (const auto& [tokens, cond] : corpus) {
        if (tokens.empty()) throw std::invalid_argument("train_count_predictor: empty sequence");
        const size_t n = tokens.size();
        const int32_t cond_id = cond.table_id();
        bool also_null = !cond.is_null() &&
                         uncond_drop_decision(tokens, cond_id, cfg.uncond_drop, seed);
        for (size_t t = 0; t < n; ++t) {
            int32_t left = t > 0 ? tokens[t - 1] : kBosToken;
            int32_t right = t + 1 < n ? tokens[t + 1] : kEosToken;
            int bucket = model.bucket_of(t, n);
            model.add_count({left, right, bucket, cond_id}, tokens[t]);
            if (also_null) model.add_count({left, right, bucket, kNullCondition}, tokens[t]);
        }
    }
    return model;
}

namespace {

json count_model_to_json(const CountModel& m) {
    json j;
    j["alpha"] = m.alpha;
    j["position_buckets"] = m.position_buckets;
    j["vocab"] = m.vocab;
    j["layer"] = m.layer;
    j["context_kind"] = m.context_kind == CountModel::ContextKind::Neighbor ? "neighbor" : "partial";
    json tables = json::array();
    for (const auto& [key, counts] : m.tables)
        tables.push_back(json{{"key", key}, {"counts", counts}});
    j["tables"] = std::move(tables);
    json marg = json::array();
    for (const auto& [cond, counts] : m.marginals)
        marg.push_back(json{{"cond", cond}, {"counts", counts}});
    j["marginals"] = std::move(marg);
    return j;
}

CountModel count_model_from_json(const json& j) {
    CountModel m;
    try {
        m.alpha = j.at("alpha").get<double>();
        m.position_buckets = j.at("position_buckets").get<int>();
        m.vocab = j.at("vocab").get<int>();
        m.layer = j.at("layer").get<int>();
        std::string kind = j.at("context_kind").get<std::string>();
        if (kind == "neighbor") m.context_kind = CountModel::ContextKind::Neighbor;
        else if (kind == "partial") m.context_kind = CountModel::ContextKind::Partial;
        else throw FormatError("count model JSON: unknown context_kind");
        for (const auto& entry : j.at("tables")) {
            auto key = entry.at("key").get<CountModel::Key>();
            auto counts = entry.at("counts").get<std::vector<double>>();
            if (counts.size() != static_cast<size_t>(m.vocab))
                throw FormatError("count model JSON: counts width != vocab");
            m.tables.emplace(key, std::move(counts));
        }
        for (const auto& entry : j.at("marginals")) {
            auto counts = entry.at("counts").get<std::vector<double>>();
            if (counts.size() != static_cast<size_t>(m.vocab))
                throw FormatError("count model JSON: counts width != vocab");
            m.marginals.emplace(entry.at("cond").get<int32_t>(), std::move(counts));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("count model JSON: ") + e.what());
    }
    if (m.vocab < 1) throw FormatError("count model JSON: vocab must be >= 1");
    return m;
}

} // namespace

std::string CountModel::to_json() const { return count_model_to_json(*this).dump(2); }

CountModel CountModel::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("count model JSON: ") + e.what());
    }
    return count_model_from_json(j);
}

size_t CountPredictor::vocab() const {
    if (models.empty()) throw ModelError("count predictor: no models");
    return static_cast<size_t>(models.begin()->second.vocab);
}

Matrix CountPredictor::predict_logits(const std::vector<int32_t>& tokens, const ConditionRef& cond,
                                      int layer) const {
    auto it = models.find(layer);
    if (it == models.end()) throw ModelError("count predictor: no model for layer");
    return it->second.predict_logits(tokens, cond);
}

std::string CountPredictor::to_json() const {
    json layers = json::array();
    for (const auto& [layer, model] : models) layers.push_back(count_model_to_json(model));
    return json{{"layers", layers}}.dump(2);
}

CountPredictor CountPredictor::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("predictor JSON: ") + e.what());
    }
    CountPredictor pred;
    if (!j.contains("layers")) throw FormatError("predictor JSON: missing layers");
    for (const auto& lj : j.at("layers")) {
        CountModel m = count_model_from_json(lj);
        int layer = m.layer;
        if (!pred.models.emplace(layer, std::move(m)).second)
            throw FormatError("predictor JSON: duplicate layer");
    }
    if (pred.models.empty()) throw FormatError("predictor JSON: no layers");
    return pred;
}

} // namespace momask
