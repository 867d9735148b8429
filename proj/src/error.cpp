#include <subedge/error.hpp>

namespace subedge {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument:
            return "invalid-argument";
        case ErrorCode::DomainError:
            return "domain-error";
        case ErrorCode::NoEdges:
            return "no-edges";
        case ErrorCode::AmbiguousTopology:
            return "ambiguous-topology";
        case ErrorCode::NotAMaximum:
            return "not-a-maximum";
        case ErrorCode::Underdetermined:
            return "underdetermined";
        case ErrorCode::SingularSystem:
            return "singular-system";
        case ErrorCode::Io:
            return "io-error";
    }
    return "unknown";
}

}  // namespace subedge
