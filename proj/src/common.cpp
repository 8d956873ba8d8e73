#include "tsbench/common.hpp"

namespace tsbench {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MissingValue: return "MissingValue";
        case ErrorCode::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
        case ErrorCode::IrregularSpacing: return "IrregularSpacing";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SplitTooLarge: return "SplitTooLarge";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::SeriesTooShort: return "SeriesTooShort";
        case ErrorCode::SeriesTooShortForPeriod: return "SeriesTooShortForPeriod";
        case ErrorCode::BadPeriod: return "BadPeriod";
        case ErrorCode::WindowTooLong: return "WindowTooLong";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::DenominatorZero: return "DenominatorZero";
        case ErrorCode::EmptySamples: return "EmptySamples";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::FamilyMismatch: return "FamilyMismatch";
        case ErrorCode::NSamplesOnPointModel: return "NSamplesOnPointModel";
        case ErrorCode::BadSpec: return "BadSpec";
        case ErrorCode::UnknownPreset: return "UnknownPreset";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

}  // namespace tsbench
