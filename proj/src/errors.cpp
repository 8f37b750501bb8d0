#include "butterfly/errors.hpp"

namespace butterfly {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation: return "validation error";
        case ErrorKind::Geometry: return "geometry error";
        case ErrorKind::Range: return "range error";
        case ErrorKind::ModelRange: return "model-range error";
        case ErrorKind::InsufficientData: return "insufficient data";
        case ErrorKind::Divergence: return "simulation diverged";
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Ordering: return "ordering error";
        case ErrorKind::DegeneratePose: return "degenerate pose";
        case ErrorKind::EmptyFlight: return "empty flight";
        case ErrorKind::Io: return "i/o error";
    }
    return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace butterfly
