#pragma once

#include <stdexcept>
#include <string>

namespace msfem {

/// Failure categories; the CLI maps each to its own exit code.
enum class ErrorCategory { config = 2, numeric = 3, io = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

} // namespace msfem
