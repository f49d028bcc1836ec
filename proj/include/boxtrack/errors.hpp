#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace boxtrack {

/// Bad user-supplied data: malformed files, invalid boxes, inconsistent configs.
/// The CLI maps this family to exit code 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidBoxError : public InputError {
public:
    using InputError::InputError;
};

class ConfigError : public InputError {
public:
    using InputError::InputError;
};

class CalibrationError : public InputError {
public:
    using InputError::InputError;
};

/// Parse failure with a location. `line` is 1-based for text formats,
/// `offset` is a byte offset for binary formats; the unused one is npos.
class FormatError : public InputError {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    FormatError(const std::string& what, std::size_t line = npos, std::size_t offset = npos)
        : InputError(decorate(what, line, offset)), line_(line), offset_(offset) {}

    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t offset() const { return offset_; }

private:
    static std::string decorate(const std::string& what, std::size_t line, std::size_t offset) {
        if (line != npos) return "line " + std::to_string(line) + ": " + what;
        if (offset != npos) return "byte " + std::to_string(offset) + ": " + what;
        return what;
    }

    std::size_t line_;
    std::size_t offset_;
};

/// Loss of numerical conditioning (non-PD covariance, singular innovation).
/// The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace boxtrack
