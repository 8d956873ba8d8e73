#include "tsbench/characterize.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace tsbench {

namespace {

// --- classical -------------------------------------------------------------

Components classical(const Vector& y, int period) {
    const Eigen::Index n = y.size();
    const Eigen::Index half = period / 2;
    Vector trend(n);

    // Centered moving average; even periods use the 2 x p weighting.
    const Eigen::Index first = half;
    const Eigen::Index last = n - 1 - half;
    for (Eigen::Index t = first; t <= last; ++t) {
        if (period % 2 == 1) {
            trend(t) = y.segment(t - half, period).mean();
        } else {
            const real inner = y.segment(t - half + 1, period - 1).sum();
            trend(t) = (inner + 0.5 * (y(t - half) + y(t + half))) / period;
        }
    }
    for (Eigen::Index t = 0; t < first; ++t) trend(t) = trend(first);
    for (Eigen::Index t = last + 1; t < n; ++t) trend(t) = trend(last);

    Vector phase_sum = Vector::Zero(period);
    Vector phase_count = Vector::Zero(period);
    for (Eigen::Index t = first; t <= last; ++t) {
        phase_sum(t % period) += y(t) - trend(t);
        phase_count(t % period) += 1;
    }
    Vector phase_mean = phase_sum.cwiseQuotient(phase_count);
    phase_mean.array() -= phase_mean.mean();

    Components c;
    c.period = period;
    c.trend = std::move(trend);
    c.seasonal.resize(n);
    for (Eigen::Index t = 0; t < n; ++t) c.seasonal(t) = phase_mean(t % period);
    c.remainder = y - c.trend - c.seasonal;
    return c;
}

// --- STL (Cleveland et al. inner loop, no robustness weights) --------------
//
// Positions are 1-based as in the reference Fortran; `y` is accessed through
// y[j - 1].

std::optional<real> loess_at(const real* y, int n, int span, int degree, real xs, int nleft,
                             int nright, std::vector<real>& w) {
    const real range = static_cast<real>(n) - 1.0;
    real h = std::max(xs - nleft, nright - xs);
    if (span > n) h += static_cast<real>((span - n) / 2);
    const real h9 = 0.999 * h;
    const real h1 = 0.001 * h;

    real total = 0;
    for (int j = nleft; j <= nright; ++j) {
        w[j - 1] = 0;
        const real r = std::abs(j - xs);
        if (r <= h9) {
            if (r <= h1) {
                w[j - 1] = 1;
            } else {
                const real u = r / h;
                const real v = 1 - u * u * u;
                w[j - 1] = v * v * v;
            }
            total += w[j - 1];
        }
    }
    if (total <= 0) return std::nullopt;
    for (int j = nleft; j <= nright; ++j) w[j - 1] /= total;

    if (h > 0 && degree > 0) {
        real a = 0;
        for (int j = nleft; j <= nright; ++j) a += w[j - 1] * j;
        real b = xs - a;
        real c = 0;
        for (int j = nleft; j <= nright; ++j) c += w[j - 1] * (j - a) * (j - a);
        if (std::sqrt(c) > 0.001 * range) {
            b /= c;
            for (int j = nleft; j <= nright; ++j) w[j - 1] *= b * (j - a) + 1;
        }
    }
    real ys = 0;
    for (int j = nleft; j <= nright; ++j) ys += w[j - 1] * y[j - 1];
    return ys;
}

// LOESS smooth evaluated at every position 1..n.
void loess_smooth(const real* y, int n, int span, int degree, real* out) {
    if (n < 2) {
        if (n == 1) out[0] = y[0];
        return;
    }
    std::vector<real> w(static_cast<std::size_t>(n));
    int nleft = 1;
    int nright = std::min(span, n);
    const int nsh = (span + 1) / 2;
    for (int i = 1; i <= n; ++i) {
        if (span < n && i > nsh && nright != n) {
            ++nleft;
            ++nright;
        }
        const auto v = loess_at(y, n, span, degree, static_cast<real>(i), nleft, nright, w);
        out[i - 1] = v ? *v : y[i - 1];
    }
}

void moving_average(const std::vector<real>& x, int len, std::vector<real>& out) {
    const std::size_t n_out = x.size() - static_cast<std::size_t>(len) + 1;
    out.assign(n_out, 0.0);
    real v = 0;
    for (int i = 0; i < len; ++i) v += x[static_cast<std::size_t>(i)];
    out[0] = v / len;
    for (std::size_t j = 1; j < n_out; ++j) {
        v = v - x[j - 1] + x[j + static_cast<std::size_t>(len) - 1];
        out[j] = v / len;
    }
}

// Cycle-subseries smoothing, extended by one period on each side.
void smooth_cycle_subseries(const std::vector<real>& y, int period, int span, int degree,
                            std::vector<real>& extended) {
    const int n = static_cast<int>(y.size());
    extended.assign(static_cast<std::size_t>(n + 2 * period), 0.0);
    std::vector<real> sub, smoothed, w;
    for (int j = 1; j <= period; ++j) {
        const int k = (n - j) / period + 1;
        sub.resize(static_cast<std::size_t>(k));
        smoothed.assign(static_cast<std::size_t>(k + 2), 0.0);
        w.assign(static_cast<std::size_t>(k), 0.0);
        for (int m = 0; m < k; ++m) sub[static_cast<std::size_t>(m)] = y[static_cast<std::size_t>(j - 1 + m * period)];
        loess_smooth(sub.data(), k, span, degree, smoothed.data() + 1);

        const int nright = std::min(span, k);
        const auto front = loess_at(sub.data(), k, span, degree, 0.0, 1, nright, w);
        smoothed[0] = front ? *front : smoothed[1];
        const int nleft = std::max(1, k - span + 1);
        const auto back = loess_at(sub.data(), k, span, degree, static_cast<real>(k + 1), nleft, k, w);
        smoothed[static_cast<std::size_t>(k + 1)] = back ? *back : smoothed[static_cast<std::size_t>(k)];

        for (int m = 0; m < k + 2; ++m)
            extended[static_cast<std::size_t>(j - 1 + m * period)] = smoothed[static_cast<std::size_t>(m)];
    }
}

int next_odd(int v) { return v % 2 == 0 ? v + 1 : v; }

Components stl(const Vector& series, int period, const StlOptions& opt) {
    const int n = static_cast<int>(series.size());
    const int seasonal_span = next_odd(std::max(3, opt.seasonal_span));
    const int trend_span =
        next_odd(std::max(3, opt.trend_span > 0 ? opt.trend_span : default_trend_span(period, seasonal_span)));
    const int low_pass_span = next_odd(std::max(3, opt.low_pass_span > 0 ? opt.low_pass_span : period));
    constexpr int degree = 1;

    const std::vector<real> y(series.data(), series.data() + n);
    std::vector<real> trend(static_cast<std::size_t>(n), 0.0);
    std::vector<real> season(static_cast<std::size_t>(n), 0.0);
    std::vector<real> work(static_cast<std::size_t>(n));
    std::vector<real> cycle, ma1, ma2, ma3, low(static_cast<std::size_t>(n));

    for (int iter = 0; iter < std::max(1, opt.inner_iterations); ++iter) {
        for (int i = 0; i < n; ++i) work[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] - trend[static_cast<std::size_t>(i)];
        smooth_cycle_subseries(work, period, seasonal_span, degree, cycle);
        moving_average(cycle, period, ma1);
        moving_average(ma1, period, ma2);
        moving_average(ma2, 3, ma3);
        loess_smooth(ma3.data(), n, low_pass_span, degree, low.data());
        for (int i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            season[u] = cycle[u + static_cast<std::size_t>(period)] - low[u];
            work[u] = y[u] - season[u];
        }
        loess_smooth(work.data(), n, trend_span, degree, trend.data());
    }

    Components c;
    c.period = period;
    c.trend = Eigen::Map<const Vector>(trend.data(), n);
    c.seasonal = Eigen::Map<const Vector>(season.data(), n);
    c.remainder = series - c.trend - c.seasonal;
    return c;
}

}  // namespace

DecompositionMethod parse_decomposition_method(std::string_view text) {
    if (text == "classical") return DecompositionMethod::Classical;
    if (text == "stl") return DecompositionMethod::Stl;
    throw Error(ErrorCode::ConfigError, "unknown decomposition method '" + std::string(text) + "'");
}

std::string_view to_string(DecompositionMethod method) noexcept {
    return method == DecompositionMethod::Stl ? "stl" : "classical";
}

int default_trend_span(int period, int seasonal_span) {
    const real raw = 1.5 * period / (1.0 - 1.5 / seasonal_span);
    return next_odd(static_cast<int>(std::ceil(raw - 1e-12)));
}

Components decompose(const Vector& series, int period, DecompositionMethod method,
                     const StlOptions& stl_options) {
    if (period < 2) throw Error(ErrorCode::BadPeriod, "period must be >= 2, got " + std::to_string(period));
    if (series.size() < 2 * static_cast<Eigen::Index>(period))
        throw Error(ErrorCode::SeriesTooShortForPeriod,
                    "series of length " + std::to_string(series.size()) +
                        " is shorter than two periods of " + std::to_string(period));
    if (!series.allFinite()) throw Error(ErrorCode::MissingValue, "series has non-finite values");
    return method == DecompositionMethod::Stl ? stl(series, period, stl_options)
                                              : classical(series, period);
}

namespace {

// 1 - Var(R) / Var(X + R), floored at 0. A constant X + R (relative to the
// series' own variance) carries no component signal and scores 0.
real strength(const Vector& component, const Components& c) {
    const Vector with_remainder = component + c.remainder;
    const real var_xr = population_variance(with_remainder);
    const real var_r = population_variance(c.remainder);
    const Vector y = c.trend + c.seasonal + c.remainder;
    const real var_y = population_variance(y);
    constexpr real kRelTol = 1e-12;
    // A series that is constant up to rounding has no components at all.
    if (var_y <= kRelTol * kRelTol * y.squaredNorm() / static_cast<real>(y.size())) return 0;
    if (var_xr <= kRelTol * var_y || var_xr < 1e-300) return 0;
    return std::clamp(1.0 - var_r / var_xr, 0.0, 1.0);
}

}  // namespace

real trend_strength(const Components& c) { return strength(c.trend, c); }

real seasonality_strength(const Components& c) { return strength(c.seasonal, c); }

}  // namespace tsbench
