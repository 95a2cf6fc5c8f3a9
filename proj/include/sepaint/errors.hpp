#ifndef SEPAINT_ERRORS_HPP
#define SEPAINT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sepaint {

// Bad construction parameters (schedule bounds, mask specs, ...). Exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid runtime inputs (shape mismatch, label out of range, ...). Exit code 1.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed files. Carries the byte offset where parsing stopped. Exit code 1.
struct FormatError : std::runtime_error {
    FormatError(const std::string& msg, long byte_offset)
        : std::runtime_error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    long offset;
};

// API misuse (backward without forward, unknown flags, ...). Exit code 2.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sepaint

#endif
