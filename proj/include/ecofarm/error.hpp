#pragma once

#include <stdexcept>
#include <string>

namespace ecofarm {

enum class ErrorCode {
    InvalidParameter,
    Unstable,
    Mismatch,
    InsufficientHistory,
    EmptyTrace,
    Parse,
    NonUniformBinning,
    NegativeCount,
    Io,
    Config,
    WorkloadExhausted,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable category alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace ecofarm
