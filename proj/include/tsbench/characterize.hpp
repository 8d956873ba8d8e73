#pragma once

#include "tsbench/common.hpp"
#include "tsbench/data.hpp"

#include <string>
#include <utility>

namespace tsbench {

enum class DecompositionMethod { Classical, Stl };

DecompositionMethod parse_decomposition_method(std::string_view text);
std::string_view to_string(DecompositionMethod method) noexcept;

/// Additive decomposition y = trend + seasonal + remainder.
struct Components {
    Vector trend;
    Vector seasonal;
    Vector remainder;
    int period = 2;
};

/// Parameters of the LOESS-based seasonal-trend decomposition. Zero spans
/// mean "derive from the period" (seasonal 7, trend from the usual formula,
/// low-pass next odd >= period).
struct StlOptions {
    int seasonal_span = 7;
    int trend_span = 0;
    int low_pass_span = 0;
    int inner_iterations = 2;
};

Components decompose(const Vector& series, int period, DecompositionMethod method,
                     const StlOptions& stl = {});

/// Smallest odd integer >= 1.5 * period / (1 - 1.5 / seasonal_span).
int default_trend_span(int period, int seasonal_span = 7);

/// max(0, 1 - Var(R) / Var(T + R)); 0 for a degenerate (constant) T + R.
real trend_strength(const Components& c);
/// max(0, 1 - Var(R) / Var(S + R)); 0 for a degenerate (constant) S + R.
real seasonality_strength(const Components& c);

/// Jensen-Shannon divergence in bits between two probability vectors.
real jensen_shannon(const Vector& p, const Vector& q);

struct GaussianJs {
    real divergence = 0;
    int windows = 0;
    int skipped = 0;
};

/// Mean JS divergence between per-window histograms and the window's fitted
/// Gaussian, over non-overlapping windows of `window_len`.
GaussianJs gaussian_js(const Vector& series, int window_len, int n_bins = 20);

/// Histogram and Gaussian bin masses for one window, both normalized.
std::pair<Vector, Vector> window_bin_masses(const Vector& window, int n_bins);

struct OutlierRatios {
    real global_pct = 0;
    real local_pct = 0;
};

OutlierRatios outlier_ratios(const Vector& series, int window_len);

struct CharacterizationReport {
    real trend_strength = 0;
    real seasonality_strength = 0;
    real js_divergence = 0;
    real outlier_global_pct = 0;
    real outlier_local_pct = 0;
    int window_len = 0;
    int period = 0;
    int skipped_windows = 0;
    int n_bins = 0;
    DecompositionMethod method = DecompositionMethod::Classical;
};

struct CharacterizationOptions {
    int period = 24;
    int window_len = 336;
    int n_bins = 20;
    DecompositionMethod method = DecompositionMethod::Classical;
};

/// Per-variate scores averaged over variates in fixed index order.
CharacterizationReport characterize_dataset(const Dataset& ds, const CharacterizationOptions& opt);

}  // namespace tsbench
