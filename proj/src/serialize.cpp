#include "tsbench/serialize.hpp"

#include <algorithm>

namespace tsbench {

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::ConfigError, where + ": " + what);
}

template <class T>
T get_as(const json& j, const std::string& key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        config_error(where + "." + key, e.what());
    }
}

template <class T>
void read_if(const json& j, const std::string& key, T& out, const std::string& where) {
    if (j.contains(key)) out = get_as<T>(j, key, where);
}

std::string_view noise_kind_name(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::Gaussian: return "gaussian";
        case NoiseKind::StudentT: return "student_t";
        case NoiseKind::Mixture: return "mixture";
    }
    return "gaussian";
}

}  // namespace

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!obj.is_object()) config_error(where, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            config_error(where + "." + key, "unknown key");
    }
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_array()) throw Error(ErrorCode::ParseError, "matrix must be a nested list");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.front().size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw Error(ErrorCode::ParseError, "ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<real>();
    }
    return m;
}

namespace {

json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vector vector_from_json(const json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<real>();
    return v;
}

}  // namespace

json to_json(const MetricReport& r) {
    json j = json::object();
    const auto values = r.values();
    for (std::size_t i = 0; i < values.size(); ++i) j[std::string(MetricReport::field_names[i])] = values[i];
    return j;
}

MetricReport metric_report_from_json(const json& j) {
    std::array<real, 10> v{};
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = j.at(std::string(MetricReport::field_names[i])).get<real>();
    return MetricReport::from_values(v);
}

json to_json(const CharacterizationReport& r) {
    return json{{"trend_strength", r.trend_strength},
                {"seasonality_strength", r.seasonality_strength},
                {"js_divergence", r.js_divergence},
                {"outlier_global_pct", r.outlier_global_pct},
                {"outlier_local_pct", r.outlier_local_pct},
                {"window_len", r.window_len},
                {"period", r.period},
                {"skipped_windows", r.skipped_windows},
                {"n_bins", r.n_bins},
                {"method", std::string(to_string(r.method))}};
}

json to_json(const Scaler& s) {
    return json{{"means", vector_to_json(s.means)}, {"stds", vector_to_json(s.stds)}, {"std_floor", s.std_floor}};
}

Scaler scaler_from_json(const json& j) {
    Scaler s;
    s.means = vector_from_json(j.at("means"));
    s.stds = vector_from_json(j.at("stds"));
    s.std_floor = j.at("std_floor").get<real>();
    return s;
}

json to_json(const ModelSpec& spec) {
    return json{{"family", std::string(to_string(spec.family))},
                {"name", spec.name},
                {"context_len", spec.context_len},
                {"horizon", spec.horizon},
                {"ar_order", spec.ar_order},
                {"ridge_lambda", spec.ridge_lambda},
                {"ma_window", spec.ma_window},
                {"channel_mode", std::string(to_string(spec.channel_mode))},
                {"use_covariates", spec.use_covariates},
                {"seed", spec.seed}};
}

ModelSpec model_spec_from_json(const json& j, const std::string& where, ModelSpec base) {
    require_keys(j,
                 {"family", "name", "context_len", "horizon", "ar_order", "ridge_lambda", "ma_window",
                  "channel_mode", "use_covariates", "seed"},
                 where);
    ModelSpec s = std::move(base);
    if (!j.contains("family")) config_error(where + ".family", "missing");
    try {
        s.family = parse_model_family(get_as<std::string>(j, "family", where));
        if (j.contains("channel_mode")) s.channel_mode = parse_channel_mode(get_as<std::string>(j, "channel_mode", where));
    } catch (const Error& e) {
        config_error(where, e.detail());
    }
    read_if(j, "name", s.name, where);
    read_if(j, "context_len", s.context_len, where);
    read_if(j, "horizon", s.horizon, where);
    read_if(j, "ar_order", s.ar_order, where);
    read_if(j, "ridge_lambda", s.ridge_lambda, where);
    read_if(j, "ma_window", s.ma_window, where);
    read_if(j, "use_covariates", s.use_covariates, where);
    read_if(j, "seed", s.seed, where);
    return s;
}

json to_json(const TrainedModel& m) {
    json weights = json::array();
    for (const auto& w : m.weights) weights.push_back(matrix_to_json(w));
    json remainder = json::array();
    for (const auto& w : m.remainder_weights) remainder.push_back(matrix_to_json(w));
    json ar = json::array();
    for (const auto& a : m.ar_coefficients) ar.push_back(vector_to_json(a));
    json sigma = json::array();
    for (const auto& s : m.sigma) sigma.push_back(vector_to_json(s));
    return json{{"spec", to_json(m.spec)},
                {"n_variates", m.n_variates},
                {"scaler", m.scaler ? to_json(*m.scaler) : json(nullptr)},
                {"level", vector_to_json(m.level)},
                {"weights", weights},
                {"remainder_weights", remainder},
                {"ar_coefficients", ar},
                {"sigma", sigma}};
}

TrainedModel trained_model_from_json(const json& j) {
    TrainedModel m;
    m.spec = model_spec_from_json(j.at("spec"), "spec");
    m.n_variates = j.at("n_variates").get<Eigen::Index>();
    if (!j.at("scaler").is_null()) m.scaler = scaler_from_json(j.at("scaler"));
    m.level = vector_from_json(j.at("level"));
    for (const auto& w : j.at("weights")) m.weights.push_back(matrix_from_json(w));
    for (const auto& w : j.at("remainder_weights")) m.remainder_weights.push_back(matrix_from_json(w));
    for (const auto& a : j.at("ar_coefficients")) m.ar_coefficients.push_back(vector_from_json(a));
    for (const auto& s : j.at("sigma")) m.sigma.push_back(vector_from_json(s));
    return m;
}

json to_json(const SynthSpec& s) {
    json noise{{"kind", std::string(noise_kind_name(s.noise.kind))}};
    switch (s.noise.kind) {
        case NoiseKind::Gaussian: noise["sigma"] = s.noise.sigma; break;
        case NoiseKind::StudentT:
            noise["nu"] = s.noise.nu;
            noise["sigma"] = s.noise.sigma;
            break;
        case NoiseKind::Mixture:
            noise["w"] = s.noise.weight;
            noise["mu1"] = s.noise.mu1;
            noise["sigma1"] = s.noise.sigma1;
            noise["mu2"] = s.noise.mu2;
            noise["sigma2"] = s.noise.sigma2;
            break;
    }
    return json{{"n_steps", s.n_steps},
                {"n_variates", s.n_variates},
                {"level", s.level},
                {"trend", {{"slope", s.slope}, {"curvature", s.curvature}}},
                {"seasonal", {{"amplitude", s.amplitude}, {"period", s.period}, {"phase", s.phase}}},
                {"noise", noise},
                {"outlier", {{"rate", s.outlier_rate}, {"magnitude", s.outlier_magnitude}}},
                {"seed", s.seed}};
}

SynthSpec synth_spec_from_json(const json& j, const std::string& where) {
    require_keys(j, {"preset", "n_steps", "n_variates", "level", "trend", "seasonal", "noise", "outlier", "seed"}, where);
    SynthSpec s;
    json body = j;
    if (j.contains("preset")) {
        try {
            s = preset(get_as<std::string>(j, "preset", where));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::UnknownPreset) throw Error(e.code(), where + ".preset: " + e.detail());
            throw;
        }
        json merged = to_json(s);
        body.erase("preset");
        // A different noise kind replaces the preset's noise block wholesale.
        if (body.contains("noise") && body["noise"].contains("kind") &&
            body["noise"]["kind"] != merged["noise"]["kind"])
            merged["noise"] = json::object();
        merged.merge_patch(body);
        body = merged;
    }
    read_if(body, "n_steps", s.n_steps, where);
    read_if(body, "n_variates", s.n_variates, where);
    read_if(body, "level", s.level, where);
    read_if(body, "seed", s.seed, where);
    if (body.contains("trend")) {
        const json& t = body["trend"];
        require_keys(t, {"slope", "curvature"}, where + ".trend");
        read_if(t, "slope", s.slope, where + ".trend");
        read_if(t, "curvature", s.curvature, where + ".trend");
    }
    if (body.contains("seasonal")) {
        const json& t = body["seasonal"];
        require_keys(t, {"amplitude", "period", "phase"}, where + ".seasonal");
        read_if(t, "amplitude", s.amplitude, where + ".seasonal");
        read_if(t, "period", s.period, where + ".seasonal");
        read_if(t, "phase", s.phase, where + ".seasonal");
    }
    if (body.contains("noise")) {
        const json& n = body["noise"];
        const std::string w = where + ".noise";
        const auto kind = n.contains("kind") ? get_as<std::string>(n, "kind", w) : std::string(noise_kind_name(s.noise.kind));
        if (kind == "gaussian") {
            require_keys(n, {"kind", "sigma"}, w);
            s.noise.kind = NoiseKind::Gaussian;
        } else if (kind == "student_t") {
            require_keys(n, {"kind", "nu", "sigma"}, w);
            s.noise.kind = NoiseKind::StudentT;
        } else if (kind == "mixture") {
            require_keys(n, {"kind", "w", "mu1", "sigma1", "mu2", "sigma2"}, w);
            s.noise.kind = NoiseKind::Mixture;
        } else {
            config_error(w + ".kind", "unknown noise kind '" + kind + "'");
        }
        read_if(n, "sigma", s.noise.sigma, w);
        read_if(n, "nu", s.noise.nu, w);
        read_if(n, "w", s.noise.weight, w);
        read_if(n, "mu1", s.noise.mu1, w);
        read_if(n, "sigma1", s.noise.sigma1, w);
        read_if(n, "mu2", s.noise.mu2, w);
        read_if(n, "sigma2", s.noise.sigma2, w);
    }
    if (body.contains("outlier")) {
        const json& o = body["outlier"];
        require_keys(o, {"rate", "magnitude"}, where + ".outlier");
        read_if(o, "rate", s.outlier_rate, where + ".outlier");
        read_if(o, "magnitude", s.outlier_magnitude, where + ".outlier");
    }
    return s;
}

}  // namespace tsbench
