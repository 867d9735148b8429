/**
 * @file error.hpp
 * @brief Error categories shared by every subedge module.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace subedge {

enum class ErrorCode {
    InvalidArgument,
    DomainError,
    NoEdges,
    AmbiguousTopology,
    NotAMaximum,
    Underdetermined,
    SingularSystem,
    Io,
};

/// Stable name used in reports and CLI messages.
const char* to_string(ErrorCode code) noexcept;

/// All library failures are reported through this exception.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace subedge
