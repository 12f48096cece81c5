#pragma once

#include <iostream>
#include <sstream>
#include <string>

namespace momask::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

// Level comes from MOMASK_LOG (error|info|debug); default error.
Level threshold();
void set_threshold(Level lv);

namespace detail {
inline void append(std::ostringstream&) {}
template <typename T, typename... Rest>
void append(std::ostringstream& os, const T& v, const Rest&... rest) {
    os << v;
    append(os, rest...);
}
template <typename... Args>
void emit(Level lv, const char* tag, const Args&... args) {
    if (lv > threshold()) return;
    std::ostringstream os;
    append(os, args...);
    std::cerr << "[" << tag << "] " << os.str() << "\n";
}
} // namespace detail

template <typename... Args>
void error(const Args&... args) { detail::emit(Level::Error, "error", args...); }
template <typename... Args>
void info(const Args&... args) { detail::emit(Level::Info, "info", args...); }
template <typename... Args>
void debug(const Args&... args) { detail::emit(Level::Debug, "debug", args...); }

} // namespace momask::log
