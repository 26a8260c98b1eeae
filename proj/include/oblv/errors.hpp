#pragma once

#include <stdexcept>
#include <string>

namespace oblv {

// Every failure the library can signal. Codes split into two categories:
// validation errors (bad inputs, bad files, bad configuration) and numerical
// failures (computation became meaningless). The CLI maps the categories to
// exit codes 1 and 2.
enum class ErrorCode {
    // validation
    DimensionMismatch,
    SampleCountMismatch,
    LabelOutOfRange,
    MissingTargetFeatures,
    ShapeMismatch,
    EmptyState,
    EmptyLabels,
    EmptyGroup,
    NoValidCells,
    InsufficientCell,
    OutOfOrder,
    BadMagic,
    TruncatedFile,
    RaggedCsv,
    NonIntegerLabel,
    ConfigError,
    // numerical
    AllRowsIdentical,
    NonFiniteInput,
    NotPSD,
    NonFiniteLoss,
    DegenerateNullspace,
    ConstraintViolation,
};

inline const char* error_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::SampleCountMismatch: return "SampleCountMismatch";
        case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
        case ErrorCode::MissingTargetFeatures: return "MissingTargetFeatures";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::EmptyState: return "EmptyState";
        case ErrorCode::EmptyLabels: return "EmptyLabels";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::NoValidCells: return "NoValidCells";
        case ErrorCode::InsufficientCell: return "InsufficientCell";
        case ErrorCode::OutOfOrder: return "OutOfOrder";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::RaggedCsv: return "RaggedCsv";
        case ErrorCode::NonIntegerLabel: return "NonIntegerLabel";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::AllRowsIdentical: return "AllRowsIdentical";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::NotPSD: return "NotPSD";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::DegenerateNullspace: return "DegenerateNullspace";
        case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    }
    return "Unknown";
}

inline bool is_numerical(ErrorCode c) {
    switch (c) {
        case ErrorCode::AllRowsIdentical:
        case ErrorCode::NonFiniteInput:
        case ErrorCode::NotPSD:
        case ErrorCode::NonFiniteLoss:
        case ErrorCode::DegenerateNullspace:
        case ErrorCode::ConstraintViolation:
            return true;
        default:
            return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace oblv
