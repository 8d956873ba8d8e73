#pragma once

#include "tsbench/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

namespace tsbench {

/// Seconds since 1970-01-01T00:00:00Z.
using Timestamp = std::int64_t;

enum class FreqUnit { Minute, Hourly, Daily, BusinessDaily, Weekly };

/// Sampling frequency: a unit and a step multiple, e.g. 15 minutes.
struct Frequency {
    FreqUnit unit = FreqUnit::Hourly;
    int step = 1;

    /// Parses "15min", "15T", "h", "1h", "D", "B", "W" and the long names
    /// "minute", "hourly", "daily", "business-daily", "weekly".
    static Frequency parse(std::string_view text);
    std::string to_string() const;

    bool operator==(const Frequency&) const = default;
};

/// Timestamp of the step that follows `t` under `freq`.
Timestamp advance(Timestamp t, const Frequency& freq);

/// Parses RFC-3339 or "YYYY-MM-DD[ HH:MM[:SS]]" ("/" also accepted as the
/// date separator). Offsets are folded into UTC. Throws ParseError.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

/// K-variate, N-step panel. `values` is K x N, `covariates` is N_c x N.
struct Dataset {
    std::string name;
    Matrix values;
    std::vector<Timestamp> timestamps;
    Frequency freq;
    Matrix covariates;

    Eigen::Index n_variates() const { return values.rows(); }
    Eigen::Index n_steps() const { return values.cols(); }
    Eigen::Index covariate_dim() const { return covariates.rows(); }

    /// Contiguous column slice [begin, begin + len), carrying timestamps and covariates.
    Dataset slice(Eigen::Index begin, Eigen::Index len) const;

    /// Throws if any structural invariant is broken.
    void validate() const;
};

struct SplitSpec {
    Eigen::Index val_len = 0;
    Eigen::Index test_len = 1;
};

struct Split {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Per-variate standardization fitted on a training segment.
struct Scaler {
    Vector means;
    Vector stds;
    real std_floor = 1e-8;
};

enum class ScaleDirection { Forward, Inverse };

struct ForecastInstance {
    Matrix context;             ///< K x L
    Matrix target;              ///< K x T
    Matrix context_covariates;  ///< N_c x L
    Matrix target_covariates;   ///< N_c x T
    Eigen::Index origin_index = 0;
};

Dataset load_wide_csv(const std::filesystem::path& path, const Frequency& freq);

/// Writes `ds` as a wide CSV that `load_wide_csv` reads back exactly.
void write_wide_csv(const Dataset& ds, const std::filesystem::path& path,
                    const std::vector<std::string>& column_names = {});

/// Tail-anchored contiguous split: test is the final `test_len` steps.
Split split_dataset(const Dataset& ds, const SplitSpec& spec);

Scaler fit_scaler(const Dataset& train, real std_floor = 1e-8);

Dataset apply_scaler(const Dataset& ds, const Scaler& s, ScaleDirection direction);

/// Row-wise transform of a K x M block; the building block of apply_scaler.
Matrix apply_scaler(const Matrix& values, const Scaler& s, ScaleDirection direction);

/// Windows at origins L-1, L-1+stride, ... with full targets inside the series.
std::vector<ForecastInstance> make_windows(const Dataset& ds, Eigen::Index context_len,
                                           Eigen::Index horizon, Eigen::Index stride);

/// Windows whose origins start at `first_origin`; context may reach back before
/// any segment boundary the caller cares about.
std::vector<ForecastInstance> make_windows_from(const Dataset& ds, Eigen::Index context_len,
                                                Eigen::Index horizon, Eigen::Index stride,
                                                Eigen::Index first_origin);

/// Replaces covariates with calendar features scaled to [-0.5, 0.5].
Dataset calendar_covariates(const Dataset& ds);

}  // namespace tsbench
