#pragma once

#include <stdexcept>
#include <string>

namespace stprio {

// Error categories; the CLI maps these onto process exit codes.
enum class ErrorCode {
    Usage,
    Syntax,
    MissingTasksConfig,
    UnknownType,
    UnresolvedReference,
    DuplicateName,
    ModelProjectMismatch,
    RuntimeFault,
    SaveWithoutReset,
    StepError,
    TraceIOError,
    VersionMismatch,
    TraceDbMismatch,
    ZeroDuration,
    DifferentialMismatch,
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

const char* error_code_name(ErrorCode code);

struct SourcePos {
    int offset = 0;
    int line = 1;
    int column = 1;
};

struct SourceSpan {
    int begin = 0; // byte offset, inclusive
    int end = 0;   // byte offset, exclusive
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);
[[noreturn]] void fail_at(ErrorCode code, const std::string& file, const SourcePos& pos,
                          const std::string& message);

} // namespace stprio
