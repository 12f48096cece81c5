#include "momask/log.hpp"

#include <cstdlib>

namespace momask::log {

namespace {
Level parse_env() {
    const char* env = std::getenv("MOMASK_LOG");
    if (env == nullptr) return Level::Error;
    std::string v(env);
    if (v == "debug") return Level::Debug;
    if (v == "info") return Level::Info;
    return Level::Error;
}
Level g_threshold = parse_env();
} // namespace

Level threshold() { return g_threshold; }
void set_threshold(Level lv) { g_threshold = lv; }

} // namespace momask::log
