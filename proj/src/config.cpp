#include "momask/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "momask/errors.hpp"

namespace momask {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    if (!j.is_object()) throw ConfigError(std::string("config: ") + where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) throw ConfigError(std::string("config: unknown key \"") + key + "\" in " + where);
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: bad value for \"") + key + "\"");
    }
}

} // namespace

void RunConfig::validate() const {
    if (stride < 1) throw ConfigError("config: stride must be >= 1");
    if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
    if (jobs < 0) throw ConfigError("config: jobs must be >= 0");
    rvq.validate();
    decode.validate();
    if (residual_cfg_scale < 0.0) throw ConfigError("config: residual_cfg_scale must be >= 0");
    if (!(predictor_alpha > 0.0)) throw ConfigError("config: predictor alpha must be > 0");
    if (uncond_drop < 0.0 || uncond_drop > 1.0)
        throw ConfigError("config: uncond_drop must be in [0,1]");
    if (replace_ratio < 0.0 || replace_ratio > 1.0)
        throw ConfigError("config: replace_ratio must be in [0,1]");
    if (position_buckets < 1) throw ConfigError("config: position_buckets must be >= 1");
}

std::string RunConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["stride"] = stride;
    j["epochs"] = epochs;
    j["jobs"] = jobs;
    j["rvq"] = {{"num_residual_layers", rvq.num_residual_layers},
                {"codebook_size", rvq.codebook_size},
                {"code_dim", rvq.code_dim},
                {"dropout_ratio", rvq.dropout_ratio},
                {"ema_decay", rvq.ema_decay},
                {"dead_code_threshold", rvq.dead_code_threshold},
                {"commitment_weight", rvq.commitment_weight}};
    j["decode"] = {{"iterations", decode.iterations},
                   {"cfg_scale", decode.cfg_scale},
                   {"residual_cfg_scale", residual_cfg_scale},
                   {"temperature", decode.temperature},
                   {"schedule", schedule_name(decode.schedule)},
                   {"greedy", decode.greedy},
                   {"cond_only", decode.cond_only}};
    j["predictor"] = {{"alpha", predictor_alpha},
                      {"uncond_drop", uncond_drop},
                      {"replace_ratio", replace_ratio},
                      {"position_buckets", position_buckets}};
    return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: parse failure: ") + e.what());
    }

    RunConfig cfg;
    check_keys(j, {"seed", "stride", "epochs", "jobs", "rvq", "decode", "predictor"}, "root");
    read_field(j, "seed", cfg.seed);
    read_field(j, "stride", cfg.stride);
    read_field(j, "epochs", cfg.epochs);
    read_field(j, "jobs", cfg.jobs);

    if (j.contains("rvq")) {
        const auto& r = j.at("rvq");
        check_keys(r,
                   {"num_residual_layers", "codebook_size", "code_dim", "dropout_ratio",
                    "ema_decay", "dead_code_threshold", "commitment_weight"},
                   "rvq");
        read_field(r, "num_residual_layers", cfg.rvq.num_residual_layers);
        read_field(r, "codebook_size", cfg.rvq.codebook_size);
        read_field(r, "code_dim", cfg.rvq.code_dim);
        read_field(r, "dropout_ratio", cfg.rvq.dropout_ratio);
        read_field(r, "ema_decay", cfg.rvq.ema_decay);
        read_field(r, "dead_code_threshold", cfg.rvq.dead_code_threshold);
        read_field(r, "commitment_weight", cfg.rvq.commitment_weight);
    }

    if (j.contains("decode")) {
        const auto& d = j.at("decode");
        check_keys(d,
                   {"iterations", "cfg_scale", "residual_cfg_scale", "temperature", "schedule",
                    "greedy", "cond_only"},
                   "decode");
        read_field(d, "iterations", cfg.decode.iterations);
        read_field(d, "cfg_scale", cfg.decode.cfg_scale);
        read_field(d, "residual_cfg_scale", cfg.residual_cfg_scale);
        read_field(d, "temperature", cfg.decode.temperature);
        if (d.contains("schedule")) {
            std::string name;
            read_field(d, "schedule", name);
            cfg.decode.schedule = parse_schedule(name);
        }
        read_field(d, "greedy", cfg.decode.greedy);
        read_field(d, "cond_only", cfg.decode.cond_only);
    }

    if (j.contains("predictor")) {
        const auto& p = j.at("predictor");
        check_keys(p, {"alpha", "uncond_drop", "replace_ratio", "position_buckets"}, "predictor");
        read_field(p, "alpha", cfg.predictor_alpha);
        read_field(p, "uncond_drop", cfg.uncond_drop);
        read_field(p, "replace_ratio", cfg.replace_ratio);
        read_field(p, "position_buckets", cfg.position_buckets);
    }

    cfg.decode.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return from_json(buf.str());
}

} // namespace momask
