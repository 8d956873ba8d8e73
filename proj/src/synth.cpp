#include "tsbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace tsbench {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// 2020-01-01T00:00:00Z
constexpr Timestamp kSynthEpoch = 1577836800;

}  // namespace

real NoiseSpec::stddev() const {
    switch (kind) {
        case NoiseKind::Gaussian: return sigma;
        case NoiseKind::StudentT: return sigma * std::sqrt(nu / (nu - 2));
        case NoiseKind::Mixture: {
            const real mean = weight * mu1 + (1 - weight) * mu2;
            const real second = weight * (sigma1 * sigma1 + mu1 * mu1) + (1 - weight) * (sigma2 * sigma2 + mu2 * mu2);
            return std::sqrt(std::max(0.0, second - mean * mean));
        }
    }
    return 0;
}

void SynthSpec::validate() const {
    auto bad = [](const std::string& msg) { throw Error(ErrorCode::BadSpec, msg); };
    if (n_steps < 1) bad("n_steps must be >= 1");
    if (n_variates < 1) bad("n_variates must be >= 1");
    if (amplitude != 0 && period < 2) bad("period must be >= 2 when amplitude is nonzero");
    if (!(outlier_rate >= 0 && outlier_rate <= 1)) bad("outlier rate must lie in [0, 1]");
    if (!(outlier_magnitude >= 0)) bad("outlier magnitude must be >= 0");
    switch (noise.kind) {
        case NoiseKind::Gaussian:
            if (!(noise.sigma >= 0)) bad("gaussian sigma must be >= 0");
            break;
        case NoiseKind::StudentT:
            if (!(noise.nu > 2)) bad("student_t nu must be > 2");
            if (!(noise.sigma >= 0)) bad("student_t sigma must be >= 0");
            break;
        case NoiseKind::Mixture:
            if (!(noise.weight >= 0 && noise.weight <= 1)) bad("mixture weight must lie in [0, 1]");
            if (!(noise.sigma1 >= 0 && noise.sigma2 >= 0)) bad("mixture sigmas must be >= 0");
            break;
    }
}

std::uint64_t variate_seed(std::uint64_t seed, Eigen::Index variate) {
    return seed ^ splitmix64(static_cast<std::uint64_t>(variate));
}

std::vector<Eigen::Index> outlier_positions(const SynthSpec& spec, Eigen::Index variate) {
    const auto count = static_cast<Eigen::Index>(std::llround(spec.outlier_rate * static_cast<real>(spec.n_steps)));
    std::vector<Eigen::Index> all(static_cast<std::size_t>(spec.n_steps));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    std::vector<Eigen::Index> picked;
    picked.reserve(static_cast<std::size_t>(count));
    std::mt19937_64 rng(splitmix64(variate_seed(spec.seed, variate)));
    std::sample(all.begin(), all.end(), std::back_inserter(picked), count, rng);
    return picked;
}

Dataset gen_series(const SynthSpec& spec, std::string name) {
    spec.validate();
    const Eigen::Index n = spec.n_steps;
    Dataset ds;
    ds.name = std::move(name);
    ds.freq = Frequency{FreqUnit::Hourly, 1};
    ds.values.resize(spec.n_variates, n);
    ds.covariates = Matrix(0, n);
    ds.timestamps.resize(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t) ds.timestamps[static_cast<std::size_t>(t)] = kSynthEpoch + 3600 * t;

    const real noise_std = spec.noise.stddev();
    const real spike = spec.outlier_magnitude * (noise_std > 0 ? noise_std : 1.0);
    for (Eigen::Index k = 0; k < spec.n_variates; ++k) {
        std::mt19937_64 rng(variate_seed(spec.seed, k));
        std::normal_distribution<real> normal(0.0, 1.0);
        std::student_t_distribution<real> student(spec.noise.kind == NoiseKind::StudentT ? spec.noise.nu : 5.0);
        std::uniform_real_distribution<real> unit(0.0, 1.0);
        for (Eigen::Index t = 0; t < n; ++t) {
            const auto tr = static_cast<real>(t);
            real x = spec.level + spec.slope * tr + spec.curvature * tr * tr;
            if (spec.amplitude != 0)
                x += spec.amplitude * std::sin(2 * std::numbers::pi * tr / spec.period + spec.phase);
            switch (spec.noise.kind) {
                case NoiseKind::Gaussian: x += spec.noise.sigma * normal(rng); break;
                case NoiseKind::StudentT: x += spec.noise.sigma * student(rng); break;
                case NoiseKind::Mixture: {
                    const bool first = unit(rng) < spec.noise.weight;
                    const real z = normal(rng);
                    x += first ? spec.noise.mu1 + spec.noise.sigma1 * z : spec.noise.mu2 + spec.noise.sigma2 * z;
                    break;
                }
            }
            ds.values(k, t) = x;
        }
        if (spec.outlier_rate > 0) {
            std::mt19937_64 sign_rng(splitmix64(variate_seed(spec.seed, k) + 1));
            std::bernoulli_distribution coin(0.5);
            for (const Eigen::Index pos : outlier_positions(spec, k))
                ds.values(k, pos) += coin(sign_rng) ? spike : -spike;
        }
    }
    return ds;
}

const std::vector<std::string_view>& preset_names() {
    static const std::vector<std::string_view> names{
        "trend_dominant", "seasonal_dominant", "gaussian_noise", "heavy_tailed", "outlier_rich", "mixture"};
    return names;
}

SynthSpec preset(std::string_view name) {
    SynthSpec s;
    s.n_steps = 4000;
    s.n_variates = 3;
    s.period = 24;
    s.noise.kind = NoiseKind::Gaussian;
    if (name == "trend_dominant") {
        s.slope = 0.05;
        s.amplitude = 0.01;
        s.noise.sigma = 0.1;
        s.seed = 1;
    } else if (name == "seasonal_dominant") {
        s.amplitude = 1.0;
        s.noise.sigma = 0.05;
        s.seed = 2;
    } else if (name == "gaussian_noise") {
        s.noise.sigma = 1.0;
        s.seed = 3;
    } else if (name == "heavy_tailed") {
        s.noise.kind = NoiseKind::StudentT;
        s.noise.nu = 3;
        s.noise.sigma = 1.0;
        s.seed = 4;
    } else if (name == "outlier_rich") {
        s.noise.sigma = 1.0;
        s.outlier_rate = 0.015;
        s.outlier_magnitude = 8;
        s.seed = 5;
    } else if (name == "mixture") {
        s.noise.kind = NoiseKind::Mixture;
        s.noise.weight = 0.3;
        s.noise.mu1 = -3.0;
        s.noise.sigma1 = 0.5;
        s.noise.mu2 = 2.0;
        s.noise.sigma2 = 0.5;
        s.seed = 6;
    } else {
        throw Error(ErrorCode::UnknownPreset, "unknown preset '" + std::string(name) + "'");
    }
    return s;
}

}  // namespace tsbench
