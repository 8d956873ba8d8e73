#include "tsbench/models.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>

namespace tsbench {

namespace {

struct FamilyName {
    ModelFamily family;
    std::string_view name;
};

constexpr std::array<FamilyName, 8> kFamilies{{
    {ModelFamily::GlobalMean, "global_mean"},
    {ModelFamily::BatchMean, "batch_mean"},
    {ModelFamily::LinearNar, "linear_nar"},
    {ModelFamily::NLinear, "nlinear"},
    {ModelFamily::DLinear, "dlinear"},
    {ModelFamily::LinearAr, "linear_ar"},
    {ModelFamily::GaussianLinearNar, "gaussian_linear_nar"},
    {ModelFamily::GaussianLinearAr, "gaussian_linear_ar"},
}};

constexpr real kSigmaFloor = 1e-6;

}  // namespace

ModelFamily parse_model_family(std::string_view text) {
    for (const auto& f : kFamilies)
        if (f.name == text) return f.family;
    throw Error(ErrorCode::ConfigError, "unknown model family '" + std::string(text) + "'");
}

std::string_view to_string(ModelFamily family) noexcept {
    for (const auto& f : kFamilies)
        if (f.family == family) return f.name;
    return "unknown";
}

ChannelMode parse_channel_mode(std::string_view text) {
    if (text == "shared") return ChannelMode::Shared;
    if (text == "per_variate") return ChannelMode::PerVariate;
    throw Error(ErrorCode::ConfigError, "unknown channel mode '" + std::string(text) + "'");
}

std::string_view to_string(ChannelMode mode) noexcept {
    return mode == ChannelMode::Shared ? "shared" : "per_variate";
}

bool is_autoregressive(ModelFamily family) noexcept {
    return family == ModelFamily::LinearAr || family == ModelFamily::GaussianLinearAr;
}

bool is_probabilistic(ModelFamily family) noexcept {
    return family == ModelFamily::GaussianLinearNar || family == ModelFamily::GaussianLinearAr;
}

void ModelSpec::validate() const {
    auto bad = [](const std::string& msg) { throw Error(ErrorCode::BadSpec, msg); };
    if (context_len < 1) bad("context length must be >= 1");
    if (horizon < 1) bad("horizon must be >= 1");
    if (!(ridge_lambda >= 0)) bad("ridge_lambda must be >= 0");
    if (is_autoregressive(family)) {
        if (ar_order < 1) bad("ar_order must be >= 1");
        if (ar_order > context_len) bad("ar_order exceeds context length");
    }
    if (family == ModelFamily::DLinear && (ma_window < 1 || ma_window % 2 == 0))
        bad("dlinear ma_window must be a positive odd integer");
    if (use_covariates && family != ModelFamily::LinearNar && family != ModelFamily::NLinear &&
        family != ModelFamily::GaussianLinearNar)
        bad("covariates are only supported by linear_nar, nlinear and gaussian_linear_nar");
}

Matrix moving_average_trend(const Matrix& context, int window) {
    const Eigen::Index len = context.cols();
    const Eigen::Index half = window / 2;
    Matrix padded(context.rows(), len + 2 * half);
    padded.leftCols(half) = context.col(0).replicate(1, half);
    padded.middleCols(half, len) = context;
    padded.rightCols(half) = context.col(len - 1).replicate(1, half);
    Matrix trend(context.rows(), len);
    for (Eigen::Index t = 0; t < len; ++t) trend.col(t) = padded.middleCols(t, window).rowwise().mean();
    return trend;
}

namespace {

ForecastInstance to_model_space(const ForecastInstance& w, const std::optional<Scaler>& scaler) {
    if (!scaler) return w;
    ForecastInstance out = w;
    out.context = apply_scaler(w.context, *scaler, ScaleDirection::Forward);
    out.target = apply_scaler(w.target, *scaler, ScaleDirection::Forward);
    return out;
}

/// Solves min ||X W^T - Y||^2 + lambda ||W||^2 for W (T x F).
Matrix solve_ridge(const Matrix& x, const Matrix& y, real lambda, bool min_norm) {
    const Eigen::Index f = x.cols();
    const Eigen::Index extra = lambda > 0 ? f : 0;
    Matrix a(x.rows() + extra, f);
    Matrix b(x.rows() + extra, y.cols());
    a.topRows(x.rows()) = x;
    b.topRows(x.rows()) = y;
    if (extra > 0) {
        a.bottomRows(f) = std::sqrt(lambda) * Matrix::Identity(f, f);
        b.bottomRows(f).setZero();
    }
    if (min_norm) {
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
        return cod.solve(b).transpose();
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    if (qr.rank() < f)
        throw Error(ErrorCode::SingularSystem,
                    "design has rank " + std::to_string(qr.rank()) + " < " + std::to_string(f) +
                        " features; use ridge_lambda > 0");
    return qr.solve(b).transpose();
}

Eigen::Index n_groups(const ModelSpec& spec, Eigen::Index k) {
    return spec.channel_mode == ChannelMode::Shared ? 1 : k;
}

bool in_group(const ModelSpec& spec, Eigen::Index group, Eigen::Index variate) {
    return spec.channel_mode == ChannelMode::Shared || group == variate;
}

Eigen::Index covariate_features(const ForecastInstance& w) {
    return w.context_covariates.size() + w.target_covariates.size();
}

/// Feature row for variate k of a linear NAR family.
RowVector nar_features(const ModelSpec& spec, const ForecastInstance& w, Eigen::Index k) {
    const Eigen::Index l = w.context.cols();
    const Eigen::Index extra = spec.use_covariates ? covariate_features(w) : 0;
    RowVector x(l + extra);
    x.head(l) = w.context.row(k);
    if (spec.family == ModelFamily::NLinear) x.head(l).array() -= w.context(k, l - 1);
    if (extra > 0) {
        const Eigen::Index nc = w.context_covariates.size();
        x.segment(l, nc) = Eigen::Map<const RowVector>(w.context_covariates.data(), nc);
        x.tail(w.target_covariates.size()) =
            Eigen::Map<const RowVector>(w.target_covariates.data(), w.target_covariates.size());
    }
    return x;
}

void check_window_shape(const ModelSpec& spec, const ForecastInstance& w, Eigen::Index k) {
    if (w.context.cols() != spec.context_len || w.context.rows() != k)
        throw Error(ErrorCode::ShapeMismatch,
                    "expected context " + std::to_string(k) + "x" + std::to_string(spec.context_len) +
                        ", got " + std::to_string(w.context.rows()) + "x" + std::to_string(w.context.cols()));
}

/// Contiguous stretches of the series covered by the windows, keyed by origin index.
std::vector<Matrix> contiguous_runs(const std::vector<ForecastInstance>& windows) {
    std::map<Eigen::Index, Vector> columns;
    for (const auto& w : windows) {
        const Eigen::Index start = w.origin_index - w.context.cols() + 1;
        for (Eigen::Index j = 0; j < w.context.cols(); ++j) columns.try_emplace(start + j, w.context.col(j));
        for (Eigen::Index j = 0; j < w.target.cols(); ++j)
            columns.try_emplace(w.origin_index + 1 + j, w.target.col(j));
    }
    std::vector<Matrix> runs;
    std::vector<Vector> current;
    Eigen::Index prev = 0;
    auto flush = [&] {
        if (current.empty()) return;
        Matrix run(current.front().size(), static_cast<Eigen::Index>(current.size()));
        for (std::size_t i = 0; i < current.size(); ++i) run.col(static_cast<Eigen::Index>(i)) = current[i];
        runs.push_back(std::move(run));
        current.clear();
    };
    for (const auto& [idx, col] : columns) {
        if (!current.empty() && idx != prev + 1) flush();
        current.push_back(col);
        prev = idx;
    }
    flush();
    return runs;
}

void fit_linear_nar(TrainedModel& m, const std::vector<ForecastInstance>& windows) {
    const ModelSpec& spec = m.spec;
    const Eigen::Index k = m.n_variates;
    for (Eigen::Index g = 0; g < n_groups(spec, k); ++g) {
        const Eigen::Index rows_per_window = spec.channel_mode == ChannelMode::Shared ? k : 1;
        const Eigen::Index n_rows = rows_per_window * static_cast<Eigen::Index>(windows.size());
        const Eigen::Index f = nar_features(spec, windows.front(), 0).size();
        Matrix x(n_rows, f);
        Matrix y(n_rows, spec.horizon);
        Eigen::Index r = 0;
        for (const auto& w : windows) {
            for (Eigen::Index v = 0; v < k; ++v) {
                if (!in_group(spec, g, v)) continue;
                x.row(r) = nar_features(spec, w, v);
                y.row(r) = w.target.row(v);
                if (spec.family == ModelFamily::NLinear) y.row(r).array() -= w.context(v, spec.context_len - 1);
                ++r;
            }
        }
        // The anchored context's last column is identically zero, so nlinear
        // takes the minimum-norm solution.
        Matrix weights = solve_ridge(x, y, spec.ridge_lambda, spec.family == ModelFamily::NLinear);
        if (is_probabilistic(spec.family)) {
            const Matrix resid = x * weights.transpose() - y;
            Vector sigma = (resid.colwise().squaredNorm() / static_cast<real>(n_rows)).cwiseSqrt().transpose();
            m.sigma.push_back(sigma.cwiseMax(kSigmaFloor));
        }
        m.weights.push_back(std::move(weights));
    }
}

void fit_dlinear(TrainedModel& m, const std::vector<ForecastInstance>& windows) {
    const ModelSpec& spec = m.spec;
    const Eigen::Index k = m.n_variates;
    const Eigen::Index l = spec.context_len;
    std::vector<Matrix> trends;
    trends.reserve(windows.size());
    for (const auto& w : windows) trends.push_back(moving_average_trend(w.context, spec.ma_window));

    for (Eigen::Index g = 0; g < n_groups(spec, k); ++g) {
        const Eigen::Index rows_per_window = spec.channel_mode == ChannelMode::Shared ? k : 1;
        const Eigen::Index n_rows = rows_per_window * static_cast<Eigen::Index>(windows.size());
        Matrix x(n_rows, 2 * l);
        Matrix y(n_rows, spec.horizon);
        Eigen::Index r = 0;
        for (std::size_t i = 0; i < windows.size(); ++i) {
            for (Eigen::Index v = 0; v < k; ++v) {
                if (!in_group(spec, g, v)) continue;
                x.row(r).head(l) = trends[i].row(v);
                x.row(r).tail(l) = windows[i].context.row(v) - trends[i].row(v);
                y.row(r) = windows[i].target.row(v);
                ++r;
            }
        }
        // Trend and remainder sum to the context, so the joint design has rank
        // at most L; take the minimum-norm solution.
        const Matrix joint = solve_ridge(x, y, spec.ridge_lambda, true);
        m.weights.push_back(joint.leftCols(l));
        m.remainder_weights.push_back(joint.rightCols(l));
    }
}

void fit_ar(TrainedModel& m, const std::vector<ForecastInstance>& windows) {
    const ModelSpec& spec = m.spec;
    const Eigen::Index k = m.n_variates;
    const int p = spec.ar_order;
    const std::vector<Matrix> runs = contiguous_runs(windows);
    for (Eigen::Index g = 0; g < n_groups(spec, k); ++g) {
        Eigen::Index n_rows = 0;
        for (const auto& run : runs)
            for (Eigen::Index v = 0; v < k; ++v)
                if (in_group(spec, g, v)) n_rows += std::max<Eigen::Index>(0, run.cols() - p);
        if (n_rows == 0) throw Error(ErrorCode::EmptyTrainingSet, "no lagged samples for ar_order " + std::to_string(p));
        Matrix x(n_rows, p);
        Matrix y(n_rows, 1);
        Eigen::Index r = 0;
        for (const auto& run : runs) {
            for (Eigen::Index v = 0; v < k; ++v) {
                if (!in_group(spec, g, v)) continue;
                for (Eigen::Index i = p; i < run.cols(); ++i) {
                    for (int j = 0; j < p; ++j) x(r, j) = run(v, i - 1 - j);
                    y(r, 0) = run(v, i);
                    ++r;
                }
            }
        }
        const Matrix coef = solve_ridge(x, y, spec.ridge_lambda, false);
        Vector a = coef.row(0).transpose();
        if (is_probabilistic(spec.family)) {
            const real rms = std::sqrt((x * a - y.col(0)).squaredNorm() / static_cast<real>(n_rows));
            m.sigma.push_back(Vector::Constant(1, std::max(rms, kSigmaFloor)));
        }
        m.ar_coefficients.push_back(std::move(a));
    }
}

std::mt19937_64 path_rng(std::uint64_t seed, Eigen::Index origin, int path) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(origin), static_cast<std::uint32_t>(path)};
    return std::mt19937_64(seq);
}

}  // namespace

TrainedModel fit(const ModelSpec& spec, const std::vector<ForecastInstance>& train_windows,
                 const std::optional<Scaler>& scaler) {
    spec.validate();
    if (train_windows.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training windows");

    TrainedModel m;
    m.spec = spec;
    m.scaler = scaler;
    m.n_variates = train_windows.front().context.rows();

    std::vector<ForecastInstance> windows;
    windows.reserve(train_windows.size());
    for (const auto& w : train_windows) {
        check_window_shape(spec, w, m.n_variates);
        if (w.target.cols() != spec.horizon || w.target.rows() != m.n_variates)
            throw Error(ErrorCode::ShapeMismatch, "training target does not match K x T");
        windows.push_back(to_model_space(w, scaler));
    }

    switch (spec.family) {
        case ModelFamily::GlobalMean: {
            const auto runs = contiguous_runs(windows);
            Vector sum = Vector::Zero(m.n_variates);
            Eigen::Index count = 0;
            for (const auto& run : runs) {
                sum += run.rowwise().sum();
                count += run.cols();
            }
            m.level = sum / static_cast<real>(count);
            break;
        }
        case ModelFamily::BatchMean: break;
        case ModelFamily::LinearNar:
        case ModelFamily::NLinear:
        case ModelFamily::GaussianLinearNar: fit_linear_nar(m, windows); break;
        case ModelFamily::DLinear: fit_dlinear(m, windows); break;
        case ModelFamily::LinearAr:
        case ModelFamily::GaussianLinearAr: fit_ar(m, windows); break;
    }
    return m;
}

std::pair<Matrix, Matrix> dlinear_branches(const TrainedModel& model, const ForecastInstance& w) {
    if (model.spec.family != ModelFamily::DLinear)
        throw Error(ErrorCode::FamilyMismatch, "dlinear_branches needs a dlinear model");
    check_window_shape(model.spec, w, model.n_variates);
    const Matrix trend = moving_average_trend(w.context, model.spec.ma_window);
    const Matrix remainder = w.context - trend;
    Matrix trend_out(model.n_variates, model.spec.horizon);
    Matrix remainder_out(model.n_variates, model.spec.horizon);
    for (Eigen::Index k = 0; k < model.n_variates; ++k) {
        const std::size_t g = model.group_of(k);
        trend_out.row(k) = (model.weights[g] * trend.row(k).transpose()).transpose();
        remainder_out.row(k) = (model.remainder_weights[g] * remainder.row(k).transpose()).transpose();
    }
    return {trend_out, remainder_out};
}

Matrix decode_nar(const TrainedModel& model, const ForecastInstance& w) {
    const ModelSpec& spec = model.spec;
    if (is_autoregressive(spec.family))
        throw Error(ErrorCode::FamilyMismatch, std::string(to_string(spec.family)) + " decodes autoregressively");
    check_window_shape(spec, w, model.n_variates);
    const Eigen::Index t = spec.horizon;
    switch (spec.family) {
        case ModelFamily::GlobalMean: return model.level.replicate(1, t);
        case ModelFamily::BatchMean: return w.context.rowwise().mean().replicate(1, t);
        case ModelFamily::DLinear: {
            const auto [trend, remainder] = dlinear_branches(model, w);
            return trend + remainder;
        }
        default: break;
    }
    Matrix out(model.n_variates, t);
    for (Eigen::Index k = 0; k < model.n_variates; ++k) {
        const RowVector x = nar_features(spec, w, k);
        const Matrix& weights = model.weights[model.group_of(k)];
        if (x.size() != weights.cols())
            throw Error(ErrorCode::ShapeMismatch, "feature length differs from fitted weights");
        out.row(k) = (weights * x.transpose()).transpose();
        if (spec.family == ModelFamily::NLinear) out.row(k).array() += w.context(k, spec.context_len - 1);
    }
    return out;
}

std::vector<Matrix> decode_ar(const TrainedModel& model, const ForecastInstance& w, int n_samples) {
    const ModelSpec& spec = model.spec;
    if (!is_autoregressive(spec.family))
        throw Error(ErrorCode::FamilyMismatch, std::string(to_string(spec.family)) + " decodes in one step");
    const bool sampling = is_probabilistic(spec.family);
    if (!sampling && n_samples != 1)
        throw Error(ErrorCode::NSamplesOnPointModel, "point AR model decodes exactly one path");
    if (n_samples < 1) throw Error(ErrorCode::EmptySamples, "n_samples must be >= 1");
    check_window_shape(spec, w, model.n_variates);

    const int p = spec.ar_order;
    const Eigen::Index horizon = spec.horizon;
    std::vector<Matrix> paths;
    paths.reserve(static_cast<std::size_t>(n_samples));
    std::normal_distribution<real> normal(0.0, 1.0);
    std::vector<real> history(static_cast<std::size_t>(p + horizon));
    for (int s = 0; s < n_samples; ++s) {
        auto rng = path_rng(spec.seed, w.origin_index, s);
        Matrix path(model.n_variates, horizon);
        for (Eigen::Index k = 0; k < model.n_variates; ++k) {
            const std::size_t g = model.group_of(k);
            const Vector& a = model.ar_coefficients[g];
            for (int j = 0; j < p; ++j)
                history[static_cast<std::size_t>(j)] = w.context(k, spec.context_len - p + j);
            for (Eigen::Index h = 0; h < horizon; ++h) {
                const std::size_t now = static_cast<std::size_t>(p + h);
                real value = 0;
                for (int j = 0; j < p; ++j) value += a(j) * history[now - 1 - static_cast<std::size_t>(j)];
                if (sampling) value += model.sigma[g](0) * normal(rng);
                history[now] = value;
                path(k, h) = value;
            }
        }
        paths.push_back(std::move(path));
    }
    return paths;
}

SampleForecast predict(const TrainedModel& model, const ForecastInstance& instance, int n_samples) {
    const ForecastInstance w = to_model_space(instance, model.scaler);
    std::vector<Matrix> paths;
    if (is_autoregressive(model.spec.family)) {
        paths = decode_ar(model, w, is_probabilistic(model.spec.family) ? n_samples : 1);
    } else {
        Matrix mu = decode_nar(model, w);
        if (model.spec.family == ModelFamily::GaussianLinearNar) {
            if (n_samples < 1) throw Error(ErrorCode::EmptySamples, "n_samples must be >= 1");
            std::normal_distribution<real> normal(0.0, 1.0);
            for (int s = 0; s < n_samples; ++s) {
                auto rng = path_rng(model.spec.seed, w.origin_index, s);
                Matrix path(mu.rows(), mu.cols());
                for (Eigen::Index k = 0; k < mu.rows(); ++k) {
                    const Vector& sigma = model.sigma[model.group_of(k)];
                    for (Eigen::Index t = 0; t < mu.cols(); ++t) path(k, t) = mu(k, t) + sigma(t) * normal(rng);
                }
                paths.push_back(std::move(path));
            }
        } else {
            paths.push_back(std::move(mu));
        }
    }
    if (model.scaler)
        for (auto& p : paths) p = apply_scaler(p, *model.scaler, ScaleDirection::Inverse);
    return SampleForecast(std::move(paths));
}

}  // namespace tsbench
