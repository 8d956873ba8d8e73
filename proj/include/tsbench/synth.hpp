#pragma once

#include "tsbench/common.hpp"
#include "tsbench/data.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace tsbench {

enum class NoiseKind { Gaussian, StudentT, Mixture };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Gaussian;
    /// Gaussian std, or Student-t scale.
    real sigma = 0;
    /// Student-t degrees of freedom, > 2.
    real nu = 5;
    /// Mixture: weight of the first component.
    real weight = 0.5;
    real mu1 = 0, sigma1 = 1, mu2 = 0, sigma2 = 1;

    /// Standard deviation of the noise distribution.
    real stddev() const;
};

/// Additive signal: level + slope t + curvature t^2 + amplitude sin(2 pi t / period + phase) + noise.
struct SynthSpec {
    Eigen::Index n_steps = 1000;
    Eigen::Index n_variates = 1;
    real level = 0;
    real slope = 0;
    real curvature = 0;
    real amplitude = 0;
    int period = 24;
    real phase = 0;
    NoiseSpec noise;
    real outlier_rate = 0;
    /// Spike size in units of the noise std.
    real outlier_magnitude = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Deterministic hourly panel; variate k draws from its own sub-seeded stream.
Dataset gen_series(const SynthSpec& spec, std::string name = "synth");

/// Positions receiving outlier spikes in variate k; exactly round(rate * n_steps).
std::vector<Eigen::Index> outlier_positions(const SynthSpec& spec, Eigen::Index variate);

/// Sub-seed for variate k.
std::uint64_t variate_seed(std::uint64_t seed, Eigen::Index variate);

/// Versioned preset specs (v1): trend_dominant, seasonal_dominant,
/// gaussian_noise, heavy_tailed, outlier_rich, mixture.
SynthSpec preset(std::string_view name);
const std::vector<std::string_view>& preset_names();
inline constexpr int kPresetVersion = 1;

}  // namespace tsbench
