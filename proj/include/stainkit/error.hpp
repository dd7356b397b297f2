#pragma once

#include <stdexcept>
#include <string>

namespace stainkit {

enum class ErrorCode {
    ParameterError,
    EmptyHistogram,
    LowSignal,
    DegenerateRank,
    UnsupportedFormat,
    IoFailure,
    HeterogeneousRows,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParameterError: return "ParameterError";
        case ErrorCode::EmptyHistogram: return "EmptyHistogram";
        case ErrorCode::LowSignal: return "LowSignal";
        case ErrorCode::DegenerateRank: return "DegenerateRank";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::HeterogeneousRows: return "HeterogeneousRows";
    }
    return "UnknownError";
}

class StainError : public std::runtime_error {
public:
    StainError(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw StainError(code, message);
}

}  // namespace stainkit
