#include "repsim/error.hpp"

namespace repsim {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::format: return "format";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::data: return "data";
        case ErrorKind::io: return "io";
        case ErrorKind::shape: return "shape";
        case ErrorKind::consistency: return "consistency";
        case ErrorKind::manifest: return "manifest";
        case ErrorKind::insufficient_samples: return "insufficient-samples";
        case ErrorKind::degenerate: return "degenerate";
        case ErrorKind::alignment: return "alignment";
        case ErrorKind::aggregation: return "aggregation";
        case ErrorKind::argument: return "argument";
        case ErrorKind::validation: return "validation";
        case ErrorKind::usage: return "usage";
        case ErrorKind::internal: return "internal";
    }
    return "internal";
}

bool user_fault(ErrorKind kind) noexcept {
    return kind != ErrorKind::internal;
}

}  // namespace repsim
