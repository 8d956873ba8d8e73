#pragma once

#include "tsbench/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace tsbench {

/// S sample paths, each K x T. A point forecast is the S = 1 case.
struct SampleForecast {
    std::vector<Matrix> paths;

    SampleForecast() = default;
    explicit SampleForecast(std::vector<Matrix> p) : paths(std::move(p)) {}
    static SampleForecast point(Matrix path) { return SampleForecast({std::move(path)}); }

    std::size_t n_samples() const { return paths.size(); }
    Eigen::Index n_variates() const { return paths.empty() ? 0 : paths.front().rows(); }
    Eigen::Index horizon() const { return paths.empty() ? 0 : paths.front().cols(); }

    /// Elementwise mean over sample paths.
    Matrix mean_path() const;
    /// The S draws at (k, t).
    Vector samples_at(Eigen::Index k, Eigen::Index t) const;
    /// Paths concatenated along time; used to pool many windows into one score.
    static SampleForecast concat_time(const std::vector<SampleForecast>& parts);
};

struct PointErrors {
    real mae = 0, mse = 0, mae_sum = 0, mse_sum = 0;
};

struct NormalizedErrors {
    real nmae = 0, nrmse = 0, nmae_sum = 0, nrmse_sum = 0;
};

struct MetricReport {
    real mae = 0, mae_sum = 0;
    real nmae = 0, nmae_sum = 0;
    real mse = 0, mse_sum = 0;
    real nrmse = 0, nrmse_sum = 0;
    real crps = 0, crps_sum = 0;

    static constexpr std::array<std::string_view, 10> field_names{
        "mae", "mae_sum", "nmae", "nmae_sum", "mse", "mse_sum", "nrmse", "nrmse_sum", "crps", "crps_sum"};

    /// Values in `field_names` order.
    std::array<real, 10> values() const {
        return {mae, mae_sum, nmae, nmae_sum, mse, mse_sum, nrmse, nrmse_sum, crps, crps_sum};
    }
    static MetricReport from_values(const std::array<real, 10>& v);
};

namespace detail {

template <class A, class B>
void require_same_shape(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(ErrorCode::ShapeMismatch,
                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

}  // namespace detail

/// MAE/MSE over all (k, t) and their `_sum` variants on the K-summed series.
template <class Target, class Pred>
PointErrors point_errors(const Eigen::MatrixBase<Target>& target, const Eigen::MatrixBase<Pred>& pred) {
    detail::require_same_shape(target, pred);
    using Scalar = typename Target::Scalar;
    const auto err = (target - pred).eval();
    const auto sum_err = (target.colwise().sum() - pred.colwise().sum()).eval();
    const Scalar n = static_cast<Scalar>(err.size());
    const Scalar t = static_cast<Scalar>(err.cols());
    PointErrors e;
    e.mae = err.cwiseAbs().sum() / n;
    e.mse = err.squaredNorm() / n;
    e.mae_sum = sum_err.cwiseAbs().sum() / t;
    e.mse_sum = sum_err.squaredNorm() / t;
    return e;
}

/// Pooled-denominator NMAE (sum|err| / sum|x|) and NRMSE (RMSE / mean|x|),
/// plus the same on the K-summed series.
template <class Target, class Pred>
NormalizedErrors normalized_errors(const Eigen::MatrixBase<Target>& target,
                                   const Eigen::MatrixBase<Pred>& pred) {
    detail::require_same_shape(target, pred);
    const auto err = (target - pred).eval();
    const auto target_sum = target.colwise().sum().eval();
    const auto sum_err = (target_sum - pred.colwise().sum()).eval();
    const real denom = target.cwiseAbs().sum();
    const real denom_sum = target_sum.cwiseAbs().sum();
    if (!(denom > 0)) throw Error(ErrorCode::DenominatorZero, "sum |x| is zero");
    if (!(denom_sum > 0)) throw Error(ErrorCode::DenominatorZero, "sum |x_sum| is zero");
    const real n = static_cast<real>(err.size());
    const real t = static_cast<real>(err.cols());
    NormalizedErrors e;
    e.nmae = err.cwiseAbs().sum() / denom;
    e.nrmse = std::sqrt(err.squaredNorm() / n) / (denom / n);
    e.nmae_sum = sum_err.cwiseAbs().sum() / denom_sum;
    e.nrmse_sum = std::sqrt(sum_err.squaredNorm() / t) / (denom_sum / t);
    return e;
}

/// CRPS of the empirical CDF of `samples` at observation `x`:
/// mean|X_i - x| - (1 / 2S^2) sum_ij |X_i - X_j|, via the sorted-sample
/// identity sum_ij |X_i - X_j| = 2 sum_i (2i - S - 1) X_(i).
template <class Derived>
typename Derived::Scalar crps_empirical(const Eigen::MatrixBase<Derived>& samples,
                                        typename Derived::Scalar x) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index s = samples.size();
    if (s == 0) throw Error(ErrorCode::EmptySamples, "CRPS needs at least one sample");
    std::vector<Scalar> sorted(static_cast<std::size_t>(s));
    for (Eigen::Index i = 0; i < s; ++i) sorted[static_cast<std::size_t>(i)] = samples(i);
    std::sort(sorted.begin(), sorted.end());
    Scalar abs_dev = 0;
    Scalar spread = 0;
    for (Eigen::Index i = 0; i < s; ++i) {
        const Scalar v = sorted[static_cast<std::size_t>(i)];
        abs_dev += std::abs(v - x);
        spread += static_cast<Scalar>(2 * (i + 1) - s - 1) * v;
    }
    const auto sd = static_cast<Scalar>(s);
    return abs_dev / sd - spread / (sd * sd);
}

real crps_panel(const Matrix& target, const SampleForecast& fc, bool normalize = true);
real crps_sum_panel(const Matrix& target, const SampleForecast& fc, bool normalize = true);

/// Point metrics from the sample-mean path (or the single path when S = 1),
/// normalized CRPS and CRPS_sum from all samples.
MetricReport evaluate(const Matrix& target, const SampleForecast& fc);

struct FieldSummary {
    std::string metric;
    real mean = 0;
    real std = 0;
};

/// Per-field mean and population std across runs, in `MetricReport::field_names` order.
std::vector<FieldSummary> aggregate_runs(const std::vector<MetricReport>& reports);

}  // namespace tsbench
