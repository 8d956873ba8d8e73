#include "test_util.hpp"
#include "tsbench/characterize.hpp"
#include "tsbench/synth.hpp"

#include <cmath>
#include <numbers>

using namespace tsbench;

namespace {

Vector sinusoid(Eigen::Index n, int period, real amplitude = 1.0) {
    Vector y(n);
    for (Eigen::Index t = 0; t < n; ++t) y(t) = amplitude * std::sin(2 * std::numbers::pi * t / period);
    return y;
}

Vector gaussian_noise(Eigen::Index n, real sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<real> z(0.0, sigma);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = z(rng);
    return v;
}

Dataset single(const Vector& y) {
    Dataset ds;
    ds.values = y.transpose();
    ds.timestamps.resize(static_cast<std::size_t>(y.size()));
    for (std::size_t t = 0; t < ds.timestamps.size(); ++t) ds.timestamps[t] = static_cast<Timestamp>(t) * 3600;
    ds.covariates = Matrix(0, y.size());
    return ds;
}

Components make_components(const Vector& trend, const Vector& seasonal, const Vector& remainder) {
    Components c;
    c.trend = trend;
    c.seasonal = seasonal;
    c.remainder = remainder;
    return c;
}

}  // namespace

TEST_CASE("decompose: pure sinusoid leaves no remainder") {
    for (const auto method : {DecompositionMethod::Classical, DecompositionMethod::Stl}) {
        for (const int period : {7, 24}) {
            const Vector y = sinusoid(20 * period, period);
            const Components c = decompose(y, period, method);
            const Eigen::Index interior = c.remainder.size() - 2 * period;
            CHECK(c.remainder.segment(period, interior).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}

TEST_CASE("decompose: constant series") {
    const Vector y = Vector::Constant(96, 3.5);
    for (const auto method : {DecompositionMethod::Classical, DecompositionMethod::Stl}) {
        const Components c = decompose(y, 12, method);
        CHECK((c.trend.array() - 3.5).abs().maxCoeff() < 1e-9);
        CHECK(c.seasonal.cwiseAbs().maxCoeff() < 1e-9);
        CHECK(c.remainder.cwiseAbs().maxCoeff() < 1e-9);
        CHECK(trend_strength(c) == 0.0);
        CHECK(seasonality_strength(c) == 0.0);
    }
}

TEST_CASE("decompose: classical trend of a ramp is the ramp") {
    for (const int period : {5, 24}) {
        Vector y(10 * period);
        for (Eigen::Index t = 0; t < y.size(); ++t) y(t) = static_cast<real>(t);
        const Components c = decompose(y, period, DecompositionMethod::Classical);
        const int half = period / 2;
        for (Eigen::Index t = half; t < y.size() - half; ++t) CHECK(c.trend(t) == doctest::Approx(t).epsilon(1e-12));
    }
}

TEST_CASE("decompose: classical seasonal sums to zero over a period") {
    const Vector y = sinusoid(480, 24, 2.0) + gaussian_noise(480, 0.3, 9);
    const Components c = decompose(y, 24, DecompositionMethod::Classical);
    for (Eigen::Index start = 0; start + 24 <= y.size(); start += 24)
        CHECK(std::abs(c.seasonal.segment(start, 24).sum()) < 1e-9);
}

TEST_CASE("decompose: reconstruction holds for both methods") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Vector y = gaussian_noise(300, 1.0, 100 + trial);
        for (Eigen::Index t = 0; t < y.size(); ++t) y(t) += 0.01 * t * trial;
        for (const auto method : {DecompositionMethod::Classical, DecompositionMethod::Stl}) {
            const Components c = decompose(y, 12, method);
            CHECK((c.trend + c.seasonal + c.remainder - y).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("decompose: errors") {
    CHECK_THROWS_CODE(decompose(Vector::Zero(30), 1, DecompositionMethod::Classical), ErrorCode::BadPeriod);
    CHECK_THROWS_CODE(decompose(Vector::Zero(30), 16, DecompositionMethod::Classical),
                      ErrorCode::SeriesTooShortForPeriod);
}

TEST_CASE("STL default trend span") {
    // 1.5 * 24 / (1 - 1.5 / 7) = 45.8 -> 46 -> next odd 47
    CHECK(default_trend_span(24) == 47);
    // 1.5 * 7 / (1 - 1.5 / 7) = 13.36 -> 14 -> 15
    CHECK(default_trend_span(7) == 15);
}

TEST_CASE("STL recovers a trend-plus-season construction") {
    const Eigen::Index n = 24 * 30;
    Vector trend(n);
    for (Eigen::Index t = 0; t < n; ++t) trend(t) = 0.02 * t;
    const Vector season = sinusoid(n, 24, 1.5);
    const Components c = decompose(trend + season, 24, DecompositionMethod::Stl);
    CHECK((c.seasonal - season).segment(48, n - 96).cwiseAbs().maxCoeff() < 0.05);
    CHECK((c.trend - trend).segment(48, n - 96).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("trend and seasonality strength formulas") {
    const Vector ramp = Vector::LinSpaced(8, 0, 7);
    CHECK(trend_strength(make_components(ramp, Vector::Zero(8), Vector::Zero(8))) == 1.0);

    // Var(R) = 0.25, Var(T + R) = 0.75 + 0.25.
    Vector r(4), t(4);
    const real a = std::sqrt(0.75);
    r << 0.5, -0.5, 0.5, -0.5;
    t << a, a, -a, -a;
    Vector tr = t + r;
    REQUIRE(population_variance(r) == doctest::Approx(0.25));
    REQUIRE(population_variance(tr) == doctest::Approx(1.0));
    CHECK(trend_strength(make_components(t, Vector::Zero(4), r)) == doctest::Approx(0.75));

    CHECK(trend_strength(make_components(Vector::Constant(4, 2.0), Vector::Zero(4), r)) == doctest::Approx(0.0));

    CHECK(seasonality_strength(make_components(Vector::Zero(8), ramp, Vector::Zero(8))) == 1.0);
    CHECK(seasonality_strength(make_components(ramp, Vector::Zero(8), Vector::LinSpaced(8, 1, -1))) == 0.0);

    // Var(R) = 0.5, Var(S + R) = 2.0.
    Vector r2(2), s2(2);
    r2 << std::sqrt(0.5), -std::sqrt(0.5);
    s2 << std::sqrt(2.0) - std::sqrt(0.5), -(std::sqrt(2.0) - std::sqrt(0.5));
    CHECK(seasonality_strength(make_components(Vector::Zero(2), s2, r2)) == doctest::Approx(0.75));
}

TEST_CASE("strengths are affine invariant and bounded") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<real> ua(0.1, 10.0), ub(-100, 100), sign(-1, 1);
    for (int trial = 0; trial < 25; ++trial) {
        Vector y = sinusoid(240, 24, 1.0) + gaussian_noise(240, 0.5, 500 + trial);
        for (Eigen::Index t = 0; t < y.size(); ++t) y(t) += 0.005 * t * (trial % 5);
        const real a = ua(rng) * (sign(rng) < 0 ? -1 : 1);
        const real b = ub(rng);
        const Vector z = (a * y).array() + b;
        for (const auto method : {DecompositionMethod::Classical, DecompositionMethod::Stl}) {
            const Components cy = decompose(y, 24, method);
            const Components cz = decompose(z, 24, method);
            CHECK(trend_strength(cz) == doctest::Approx(trend_strength(cy)).epsilon(1e-9));
            CHECK(seasonality_strength(cz) == doctest::Approx(seasonality_strength(cy)).epsilon(1e-9));
            for (const real v : {trend_strength(cy), seasonality_strength(cy)}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
}

TEST_CASE("trend strength falls as noise grows") {
    const Eigen::Index n = 24 * 40;
    Vector trend(n);
    for (Eigen::Index t = 0; t < n; ++t) trend(t) = 0.01 * t;
    real previous = 2.0;
    int level = 0;
    for (const real sigma : {0.1, 0.5, 1.0, 2.0, 4.0}) {
        const Vector y = trend + gaussian_noise(n, sigma, 900 + level++);
        const real ft = trend_strength(decompose(y, 24, DecompositionMethod::Classical));
        CHECK(ft <= previous);
        previous = ft;
    }
}

TEST_CASE("Jensen-Shannon divergence on bin vectors") {
    Vector p(4), q(4);
    p << 0.1, 0.4, 0.4, 0.1;
    q << 0.25, 0.25, 0.25, 0.25;
    CHECK(jensen_shannon(p, q) == doctest::Approx(jensen_shannon(q, p)).epsilon(1e-15));
    CHECK(jensen_shannon(p, p) == 0.0);
    CHECK(jensen_shannon(p, q) > 0.0);
    Vector a(2), b(2);
    a << 1, 0;
    b << 0, 1;
    CHECK(jensen_shannon(a, b) == doctest::Approx(1.0));

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        Vector x = tsbench::testing::random_matrix(10, 1, rng, 0, 1);
        Vector y = tsbench::testing::random_matrix(10, 1, rng, 0, 1);
        x /= x.sum();
        y /= y.sum();
        const real js = jensen_shannon(x, y);
        CHECK(js == doctest::Approx(jensen_shannon(y, x)).epsilon(1e-14));
        CHECK(js > 0.0);
        CHECK(js <= 1.0);
    }
}

TEST_CASE("gaussian_js") {
    SUBCASE("two-point mass is far from Gaussian") {
        Vector w(30);
        w.head(15).setConstant(-1.0);
        w.tail(15).setConstant(1.0);
        const GaussianJs js = gaussian_js(w, 30, 20);
        // Frozen from an independent histogram / normal-CDF computation.
        CHECK(js.divergence == doctest::Approx(0.6183421235391335).epsilon(1e-10));
        CHECK(js.divergence > 0.3);
        CHECK(js.skipped == 0);
    }
    SUBCASE("histogram equal to the Gaussian bin mass gives zero") {
        const Vector w = gaussian_noise(336, 1.0, 4);
        auto [hist, gauss] = window_bin_masses(w, 20);
        CHECK(jensen_shannon(gauss, gauss) == 0.0);
        CHECK(hist.sum() == doctest::Approx(1.0));
        CHECK(gauss.sum() == doctest::Approx(1.0));
    }
    SUBCASE("constant windows are skipped") {
        Vector y(90);
        y.head(30).setConstant(2.0);
        y.segment(30, 60) = gaussian_noise(60, 1.0, 2);
        const GaussianJs js = gaussian_js(y, 30, 20);
        CHECK(js.windows == 3);
        CHECK(js.skipped == 1);
    }
    SUBCASE("large Gaussian windows are close to Gaussian") {
        const GaussianJs js = gaussian_js(gaussian_noise(3360, 1.0, 77), 336, 20);
        CHECK(js.divergence < 0.1);
    }
    CHECK_THROWS_CODE(gaussian_js(Vector::Zero(10), 30, 20), ErrorCode::WindowTooLong);
}

TEST_CASE("outlier ratios") {
    const OutlierRatios flat = outlier_ratios(Vector::Constant(100, 4.0), 30);
    CHECK(flat.global_pct == 0.0);
    CHECK(flat.local_pct == 0.0);

    Vector alt(100);
    for (Eigen::Index i = 0; i < alt.size(); ++i) alt(i) = i % 2 == 0 ? 1.0 : -1.0;
    const OutlierRatios a = outlier_ratios(alt, 30);
    CHECK(a.global_pct == 0.0);
    CHECK(a.local_pct == 0.0);

    Vector spiky(1000);
    spiky.head(999) = gaussian_noise(999, 1.0, 123);
    spiky(999) = 100.0;
    // Brute-force oracle: count |z| > 3 with population std.
    const real mean = spiky.mean();
    real ss = 0;
    for (Eigen::Index i = 0; i < spiky.size(); ++i) ss += (spiky(i) - mean) * (spiky(i) - mean);
    const real sd = std::sqrt(ss / 1000.0);
    int count = 0;
    for (Eigen::Index i = 0; i < spiky.size(); ++i)
        if (std::abs((spiky(i) - mean) / sd) > 3) ++count;
    const OutlierRatios s = outlier_ratios(spiky, 30);
    CHECK(s.global_pct == doctest::Approx(100.0 * count / 1000.0));
    CHECK(s.global_pct == doctest::Approx(0.1));
}

TEST_CASE("characterize_dataset averages variates") {
    const Vector seasonal = sinusoid(480, 24) + gaussian_noise(480, 0.05, 1);
    CharacterizationOptions opt;
    opt.period = 24;
    opt.window_len = 48;

    const CharacterizationReport one = characterize_dataset(single(seasonal), opt);
    const Components c = decompose(seasonal, 24, DecompositionMethod::Classical);
    CHECK(one.trend_strength == doctest::Approx(trend_strength(c)));
    CHECK(one.seasonality_strength == doctest::Approx(seasonality_strength(c)));
    CHECK(one.js_divergence == doctest::Approx(gaussian_js(seasonal, 48, 20).divergence));

    Dataset two;
    Vector ramp(480);
    for (Eigen::Index t = 0; t < 480; ++t) ramp(t) = static_cast<real>(t);
    two.values.resize(2, 480);
    two.values.row(0) = ramp.transpose();
    two.values.row(1) = Vector::Constant(480, 1.0).transpose();
    two.timestamps = single(ramp).timestamps;
    two.covariates = Matrix(0, 480);
    const CharacterizationReport r = characterize_dataset(two, opt);
    const real ft_ramp = trend_strength(decompose(ramp, 24, DecompositionMethod::Classical));
    CHECK(ft_ramp > 0.99);
    CHECK(r.trend_strength == doctest::Approx(0.5 * ft_ramp).epsilon(1e-12));

    try {
        Dataset shortie = single(Vector::Zero(30));
        characterize_dataset(shortie, opt);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SeriesTooShortForPeriod);
        REQUIRE(e.variate.has_value());
        CHECK(*e.variate == 0);
    }
}
