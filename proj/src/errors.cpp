#include "ioslab/errors.hpp"

namespace ioslab {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return "usage";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Range: return "range";
        case ErrorKind::Precondition: return "precondition";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Horizon: return "horizon";
        case ErrorKind::Construction: return "construction";
        case ErrorKind::ForwardCompleteness: return "forward-completeness";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage:
        case ErrorKind::Domain:
        case ErrorKind::Range:
        case ErrorKind::Precondition:
            return 2;
        default:
            return 3;
    }
}

}  // namespace ioslab
