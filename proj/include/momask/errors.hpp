#pragma once

#include <stdexcept>
#include <string>

namespace momask {

// Exit-code mapping for the CLI: ConfigError -> 2, DataError -> 3, ModelError -> 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or truncated file payloads.
struct FormatError : DataError {
    explicit FormatError(const std::string& msg) : DataError(msg) {}
};

struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace momask
