#pragma once

#include <stdexcept>
#include <string>

namespace lcfed {

// Malformed config file or config value.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed binary input (IDX files); message names the byte offset.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Training produced a non-finite parameter or loss.
struct NumericError : std::runtime_error {
    NumericError(const std::string& what, int step)
        : std::runtime_error(what), step(step) {}
    int step = -1;
    int device = -1; // filled in by the server when known
    int round = -1;
};

} // namespace lcfed
