#include "stprio/diag.hpp"

namespace stprio {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::Syntax: return "SyntaxError";
    case ErrorCode::MissingTasksConfig: return "MissingTasksConfig";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::UnresolvedReference: return "UnresolvedReference";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::ModelProjectMismatch: return "ModelProjectMismatch";
    case ErrorCode::RuntimeFault: return "RuntimeFault";
    case ErrorCode::SaveWithoutReset: return "SaveWithoutReset";
    case ErrorCode::StepError: return "StepError";
    case ErrorCode::TraceIOError: return "TraceIOError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::TraceDbMismatch: return "TraceDbMismatch";
    case ErrorCode::ZeroDuration: return "ZeroDuration";
    case ErrorCode::DifferentialMismatch: return "DifferentialMismatch";
    case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
    throw Error(code, std::string(error_code_name(code)) + ": " + message);
}

void fail_at(ErrorCode code, const std::string& file, const SourcePos& pos,
             const std::string& message) {
    throw Error(code, std::string(error_code_name(code)) + ": " + file + ":" +
                          std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
                          message);
}

} // namespace stprio
