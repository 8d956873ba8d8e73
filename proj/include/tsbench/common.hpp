#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tsbench {

template <class Scalar, int Rows = Eigen::Dynamic, int Cols = Eigen::Dynamic>
using matrix = Eigen::Matrix<Scalar, Rows, Cols>;

template <class Scalar, int Rows = Eigen::Dynamic>
using vector = matrix<Scalar, Rows, 1>;

using real = double;
using Matrix = matrix<real>;
using Vector = vector<real>;
using RowVector = Eigen::Matrix<real, 1, Eigen::Dynamic>;

/// Every failure mode the toolkit reports. Names match the error kinds used
/// throughout the documentation so callers can switch on them.
enum class ErrorCode {
    MissingValue,
    NonMonotoneTimestamps,
    IrregularSpacing,
    ParseError,
    SplitTooLarge,
    TooFewSamples,
    DimensionMismatch,
    SeriesTooShort,
    SeriesTooShortForPeriod,
    BadPeriod,
    WindowTooLong,
    ShapeMismatch,
    DenominatorZero,
    EmptySamples,
    EmptyInput,
    EmptyTrainingSet,
    SingularSystem,
    FamilyMismatch,
    NSamplesOnPointModel,
    BadSpec,
    UnknownPreset,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    /// Message without the error-kind prefix.
    const std::string& detail() const noexcept { return detail_; }

    /// 1-based data row (header excluded) for CSV errors, when known.
    std::optional<std::size_t> row;
    /// 1-based file column for CSV errors, when known.
    std::optional<std::size_t> col;
    /// Variate index for errors raised while processing one variate of a panel.
    std::optional<std::size_t> variate;

private:
    ErrorCode code_;
    std::string detail_;
};

/// Population mean and variance (divisor N).
template <class Derived>
real population_mean(const Eigen::DenseBase<Derived>& x) {
    return x.size() == 0 ? real(0) : x.mean();
}

template <class Derived>
real population_variance(const Eigen::DenseBase<Derived>& x) {
    if (x.size() == 0) return 0;
    const real m = x.mean();
    return (x.derived().array() - m).square().sum() / static_cast<real>(x.size());
}

}  // namespace tsbench
