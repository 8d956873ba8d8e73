#include "tsbench/metrics.hpp"

namespace tsbench {

Matrix SampleForecast::mean_path() const {
    if (paths.empty()) throw Error(ErrorCode::EmptySamples, "forecast has no sample paths");
    Matrix m = paths.front();
    for (std::size_t i = 1; i < paths.size(); ++i) m += paths[i];
    return m / static_cast<real>(paths.size());
}

Vector SampleForecast::samples_at(Eigen::Index k, Eigen::Index t) const {
    Vector v(static_cast<Eigen::Index>(paths.size()));
    for (std::size_t i = 0; i < paths.size(); ++i) v(static_cast<Eigen::Index>(i)) = paths[i](k, t);
    return v;
}

SampleForecast SampleForecast::concat_time(const std::vector<SampleForecast>& parts) {
    if (parts.empty()) throw Error(ErrorCode::EmptyInput, "no forecasts to concatenate");
    const std::size_t s = parts.front().n_samples();
    const Eigen::Index k = parts.front().n_variates();
    Eigen::Index total = 0;
    for (const auto& p : parts) {
        if (p.n_samples() != s || p.n_variates() != k)
            throw Error(ErrorCode::ShapeMismatch, "forecasts disagree on S or K");
        total += p.horizon();
    }
    std::vector<Matrix> paths(s, Matrix(k, total));
    Eigen::Index offset = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < s; ++i) paths[i].middleCols(offset, p.horizon()) = p.paths[i];
        offset += p.horizon();
    }
    return SampleForecast(std::move(paths));
}

MetricReport MetricReport::from_values(const std::array<real, 10>& v) {
    MetricReport r;
    r.mae = v[0];
    r.mae_sum = v[1];
    r.nmae = v[2];
    r.nmae_sum = v[3];
    r.mse = v[4];
    r.mse_sum = v[5];
    r.nrmse = v[6];
    r.nrmse_sum = v[7];
    r.crps = v[8];
    r.crps_sum = v[9];
    return r;
}

namespace {

void check_forecast(const Matrix& target, const SampleForecast& fc) {
    if (fc.paths.empty()) throw Error(ErrorCode::EmptySamples, "forecast has no sample paths");
    for (const auto& p : fc.paths) detail::require_same_shape(target, p);
}

}  // namespace

real crps_panel(const Matrix& target, const SampleForecast& fc, bool normalize) {
    check_forecast(target, fc);
    Matrix scores(target.rows(), target.cols());
    for (Eigen::Index k = 0; k < target.rows(); ++k)
        for (Eigen::Index t = 0; t < target.cols(); ++t)
            scores(k, t) = crps_empirical(fc.samples_at(k, t), target(k, t));
    if (!normalize) return scores.mean();
    const real denom = target.cwiseAbs().sum();
    if (!(denom > 0)) throw Error(ErrorCode::DenominatorZero, "sum |x| is zero");
    return scores.cwiseAbs().sum() / denom;
}

real crps_sum_panel(const Matrix& target, const SampleForecast& fc, bool normalize) {
    check_forecast(target, fc);
    const RowVector target_sum = target.colwise().sum();
    const Eigen::Index s = static_cast<Eigen::Index>(fc.n_samples());
    Matrix sample_sums(s, target.cols());
    for (Eigen::Index i = 0; i < s; ++i) sample_sums.row(i) = fc.paths[static_cast<std::size_t>(i)].colwise().sum();
    RowVector scores(target.cols());
    for (Eigen::Index t = 0; t < target.cols(); ++t) scores(t) = crps_empirical(sample_sums.col(t), target_sum(t));
    if (!normalize) return scores.mean();
    const real denom = target_sum.cwiseAbs().sum();
    if (!(denom > 0)) throw Error(ErrorCode::DenominatorZero, "sum |x_sum| is zero");
    return scores.cwiseAbs().sum() / denom;
}

MetricReport evaluate(const Matrix& target, const SampleForecast& fc) {
    check_forecast(target, fc);
    const Matrix point = fc.n_samples() == 1 ? fc.paths.front() : fc.mean_path();
    const PointErrors pe = point_errors(target, point);
    const NormalizedErrors ne = normalized_errors(target, point);
    MetricReport r;
    r.mae = pe.mae;
    r.mse = pe.mse;
    r.mae_sum = pe.mae_sum;
    r.mse_sum = pe.mse_sum;
    r.nmae = ne.nmae;
    r.nrmse = ne.nrmse;
    r.nmae_sum = ne.nmae_sum;
    r.nrmse_sum = ne.nrmse_sum;
    r.crps = crps_panel(target, fc, true);
    r.crps_sum = crps_sum_panel(target, fc, true);
    return r;
}

std::vector<FieldSummary> aggregate_runs(const std::vector<MetricReport>& reports) {
    if (reports.empty()) throw Error(ErrorCode::EmptyInput, "no reports to aggregate");
    const auto n = static_cast<real>(reports.size());
    std::vector<FieldSummary> out;
    for (std::size_t f = 0; f < MetricReport::field_names.size(); ++f) {
        const real first = reports.front().values()[f];
        const bool constant = std::all_of(reports.begin(), reports.end(),
                                          [&](const MetricReport& r) { return r.values()[f] == first; });
        if (constant) {
            out.push_back({std::string(MetricReport::field_names[f]), first, 0.0});
            continue;
        }
        real mean = 0;
        for (const auto& r : reports) mean += r.values()[f];
        mean /= n;
        real var = 0;
        for (const auto& r : reports) {
            const real d = r.values()[f] - mean;
            var += d * d;
        }
        out.push_back({std::string(MetricReport::field_names[f]), mean, std::sqrt(var / n)});
    }
    return out;
}

}  // namespace tsbench
