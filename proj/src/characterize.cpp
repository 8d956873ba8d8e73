#include "tsbench/characterize.hpp"

#include <algorithm>
#include <cmath>

namespace tsbench {

namespace {

real normal_cdf(real z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

constexpr real kStdFloor = 1e-8;

bool zero_variance(real mean, real std) { return std <= 1e-12 * std::max(1.0, std::abs(mean)); }

}  // namespace

real jensen_shannon(const Vector& p, const Vector& q) {
    if (p.size() != q.size()) throw Error(ErrorCode::ShapeMismatch, "bin vectors differ in length");
    real js = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const real m = 0.5 * (p(i) + q(i));
        if (p(i) > 0) js += 0.5 * p(i) * std::log2(p(i) / m);
        if (q(i) > 0) js += 0.5 * q(i) * std::log2(q(i) / m);
    }
    return std::clamp(js, 0.0, 1.0);
}

std::pair<Vector, Vector> window_bin_masses(const Vector& window, int n_bins) {
    const real mean = window.mean();
    const real std = std::sqrt(population_variance(window));
    const real lo = mean - 4 * std;
    const real width = 8 * std / n_bins;

    Vector hist = Vector::Zero(n_bins);
    for (Eigen::Index i = 0; i < window.size(); ++i) {
        const real x = window(i);
        if (x < lo || x > mean + 4 * std) continue;
        auto b = static_cast<Eigen::Index>(std::floor((x - lo) / width));
        b = std::clamp<Eigen::Index>(b, 0, n_bins - 1);
        hist(b) += 1;
    }
    Vector gauss(n_bins);
    for (int b = 0; b < n_bins; ++b) {
        const real left = (lo + b * width - mean) / std;
        const real right = (lo + (b + 1) * width - mean) / std;
        gauss(b) = normal_cdf(right) - normal_cdf(left);
    }
    hist /= hist.sum();
    gauss /= gauss.sum();
    return {hist, gauss};
}

GaussianJs gaussian_js(const Vector& series, int window_len, int n_bins) {
    if (window_len < 8 || n_bins < 4)
        throw Error(ErrorCode::BadSpec, "gaussian_js needs window_len >= 8 and n_bins >= 4");
    if (series.size() < window_len)
        throw Error(ErrorCode::WindowTooLong, "window of " + std::to_string(window_len) +
                                                  " exceeds series length " + std::to_string(series.size()));
    GaussianJs out;
    real total = 0;
    int used = 0;
    const Eigen::Index n_windows = series.size() / window_len;
    for (Eigen::Index w = 0; w < n_windows; ++w) {
        const Vector window = series.segment(w * window_len, window_len);
        ++out.windows;
        if (std::sqrt(population_variance(window)) < kStdFloor) {
            ++out.skipped;
            continue;
        }
        const auto [hist, gauss] = window_bin_masses(window, n_bins);
        total += jensen_shannon(hist, gauss);
        ++used;
    }
    out.divergence = used > 0 ? total / used : 0.0;
    return out;
}

namespace {

// Count of |z| > 3 within x.
Eigen::Index count_outliers(const Vector& x) {
    const real mean = x.mean();
    const real std = std::sqrt(population_variance(x));
    if (zero_variance(mean, std)) return 0;
    return ((x.array() - mean).abs() / std > 3.0).count();
}

}  // namespace

OutlierRatios outlier_ratios(const Vector& series, int window_len) {
    if (window_len < 1 || series.size() < window_len)
        throw Error(ErrorCode::WindowTooLong, "window of " + std::to_string(window_len) +
                                                  " exceeds series length " + std::to_string(series.size()));
    OutlierRatios r;
    r.global_pct = 100.0 * static_cast<real>(count_outliers(series)) / static_cast<real>(series.size());
    const Eigen::Index n_windows = series.size() / window_len;
    real frac_sum = 0;
    for (Eigen::Index w = 0; w < n_windows; ++w) {
        const Vector window = series.segment(w * window_len, window_len);
        frac_sum += static_cast<real>(count_outliers(window)) / window_len;
    }
    r.local_pct = 100.0 * frac_sum / static_cast<real>(n_windows);
    return r;
}

CharacterizationReport characterize_dataset(const Dataset& ds, const CharacterizationOptions& opt) {
    CharacterizationReport rep;
    rep.window_len = opt.window_len;
    rep.period = opt.period;
    rep.n_bins = opt.n_bins;
    rep.method = opt.method;

    const Eigen::Index k = ds.n_variates();
    for (Eigen::Index v = 0; v < k; ++v) {
        try {
            const Vector series = ds.values.row(v).transpose();
            const Components c = decompose(series, opt.period, opt.method);
            const GaussianJs js = gaussian_js(series, opt.window_len, opt.n_bins);
            const OutlierRatios out = outlier_ratios(series, opt.window_len);
            rep.trend_strength += trend_strength(c);
            rep.seasonality_strength += seasonality_strength(c);
            rep.js_divergence += js.divergence;
            rep.skipped_windows += js.skipped;
            rep.outlier_global_pct += out.global_pct;
            rep.outlier_local_pct += out.local_pct;
        } catch (const Error& e) {
            Error wrapped(e.code(), "variate " + std::to_string(v) + ": " + e.detail());
            wrapped.variate = static_cast<std::size_t>(v);
            throw wrapped;
        }
    }
    const real inv = 1.0 / static_cast<real>(k);
    rep.trend_strength *= inv;
    rep.seasonality_strength *= inv;
    rep.js_divergence *= inv;
    rep.outlier_global_pct *= inv;
    rep.outlier_local_pct *= inv;
    return rep;
}

}  // namespace tsbench
