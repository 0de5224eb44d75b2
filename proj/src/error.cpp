#include "wqm/error.hpp"

namespace wqm {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
        case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
        case ErrorCode::NonUnitary: return "NON_UNITARY";
        case ErrorCode::UnknownSerial: return "UNKNOWN_SERIAL";
        case ErrorCode::UnknownHandle: return "UNKNOWN_HANDLE";
        case ErrorCode::HandleConsumed: return "HANDLE_CONSUMED";
        case ErrorCode::HandleNotOwned: return "HANDLE_NOT_OWNED";
        case ErrorCode::NoCloning: return "NO_CLONING";
        case ErrorCode::SerialCollision: return "SERIAL_COLLISION";
        case ErrorCode::ParseError: return "PARSE_ERROR";
        case ErrorCode::VersionMismatch: return "VERSION_MISMATCH";
        case ErrorCode::Io: return "IO_ERROR";
        case ErrorCode::InternalConsistency: return "INTERNAL_CONSISTENCY";
        case ErrorCode::BadRequest: return "BAD_REQUEST";
        case ErrorCode::UnsupportedVersion: return "UNSUPPORTED_VERSION";
    }
    return "UNKNOWN";
}

}  // namespace wqm
