#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace butterfly {

enum class ErrorKind {
    Validation,
    Geometry,
    Range,
    ModelRange,
    InsufficientData,
    Divergence,
    Parse,
    Ordering,
    DegeneratePose,
    EmptyFlight,
    Io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace butterfly
