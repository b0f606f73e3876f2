#include "ecofarm/error.hpp"

namespace ecofarm {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidParameter: return "invalid parameter";
        case ErrorCode::Unstable: return "unstable instance";
        case ErrorCode::Mismatch: return "mismatch";
        case ErrorCode::InsufficientHistory: return "insufficient history";
        case ErrorCode::EmptyTrace: return "empty trace";
        case ErrorCode::Parse: return "parse error";
        case ErrorCode::NonUniformBinning: return "non-uniform binning";
        case ErrorCode::NegativeCount: return "negative count";
        case ErrorCode::Io: return "i/o error";
        case ErrorCode::Config: return "configuration error";
        case ErrorCode::WorkloadExhausted: return "workload exhausted";
    }
    return "unknown error";
}

}  // namespace ecofarm
