#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wqm {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    NonUnitary,
    UnknownSerial,
    UnknownHandle,
    HandleConsumed,
    HandleNotOwned,
    NoCloning,
    SerialCollision,
    ParseError,
    VersionMismatch,
    Io,
    InternalConsistency,
    BadRequest,
    UnsupportedVersion,
};

// Upper-snake name used on the wire and in diagnostics, e.g. "HANDLE_CONSUMED".
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace wqm
