#pragma once

#include "tsbench/common.hpp"
#include "tsbench/data.hpp"
#include "tsbench/metrics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tsbench {

/**
 * Forecaster families. Every family is an encoder/forecaster pair:
 *
 *  - global_mean, batch_mean: statistic encoders, identity forecaster.
 *  - linear_nar, nlinear, dlinear: linear encoders decoded in one shot.
 *  - linear_ar: one-step linear predictor iterated over the horizon with
 *    predictions fed back as inputs.
 *  - gaussian_linear_nar / gaussian_linear_ar: the same encoders with a
 *    Gaussian forecaster head, sampled at decode time.
 */
enum class ModelFamily {
    GlobalMean,
    BatchMean,
    LinearNar,
    NLinear,
    DLinear,
    LinearAr,
    GaussianLinearNar,
    GaussianLinearAr,
};

enum class ChannelMode { Shared, PerVariate };

ModelFamily parse_model_family(std::string_view text);
std::string_view to_string(ModelFamily family) noexcept;
ChannelMode parse_channel_mode(std::string_view text);
std::string_view to_string(ChannelMode mode) noexcept;

bool is_autoregressive(ModelFamily family) noexcept;
bool is_probabilistic(ModelFamily family) noexcept;

struct ModelSpec {
    ModelFamily family = ModelFamily::LinearNar;
    /// Display label; defaults to the family name.
    std::string name;
    Eigen::Index context_len = 96;
    Eigen::Index horizon = 96;
    int ar_order = 1;
    real ridge_lambda = 0;
    int ma_window = 25;
    ChannelMode channel_mode = ChannelMode::Shared;
    /// Append calendar covariates of context and target to the linear design
    /// (linear_nar, nlinear, gaussian_linear_nar only).
    bool use_covariates = false;
    std::uint64_t seed = 0;

    std::string label() const { return name.empty() ? std::string(to_string(family)) : name; }
    void validate() const;
};

/// Parameters of a fitted forecaster. All weights live in standardized space
/// when `scaler` is set; `predict` maps back to original units.
struct TrainedModel {
    ModelSpec spec;
    std::optional<Scaler> scaler;
    Eigen::Index n_variates = 0;

    /// global_mean: per-variate training mean.
    Vector level;
    /// Linear NAR families: one T x F map per channel group. For dlinear this
    /// is the trend branch.
    std::vector<Matrix> weights;
    /// dlinear remainder branch, T x L per channel group.
    std::vector<Matrix> remainder_weights;
    /// AR families: coefficients per channel group, most recent lag first.
    std::vector<Vector> ar_coefficients;
    /// Gaussian families: per-horizon-step sigma (NAR) or one-step sigma (AR)
    /// per channel group.
    std::vector<Vector> sigma;

    std::size_t group_of(Eigen::Index variate) const {
        return spec.channel_mode == ChannelMode::Shared ? 0 : static_cast<std::size_t>(variate);
    }
};

/// Closed-form fit. Windows are in original units; they are standardized with
/// `scaler` first when one is given.
TrainedModel fit(const ModelSpec& spec, const std::vector<ForecastInstance>& train_windows,
                 const std::optional<Scaler>& scaler = std::nullopt);

/// One-shot decode of all T steps in model space (point / mean path).
Matrix decode_nar(const TrainedModel& model, const ForecastInstance& instance);

/// Recursive decode in model space; gaussian_linear_ar feeds back its own draws
/// on each of `n_samples` independently seeded paths.
std::vector<Matrix> decode_ar(const TrainedModel& model, const ForecastInstance& instance,
                              int n_samples);

/// Dispatching forecast in original units. Point families always return S = 1.
SampleForecast predict(const TrainedModel& model, const ForecastInstance& instance,
                       int n_samples = 100);

/// dlinear decomposition of a K x L context: replicate-padded moving average.
Matrix moving_average_trend(const Matrix& context, int window);

/// dlinear branch outputs in model space: {trend branch, remainder branch}.
std::pair<Matrix, Matrix> dlinear_branches(const TrainedModel& model, const ForecastInstance& instance);

}  // namespace tsbench
