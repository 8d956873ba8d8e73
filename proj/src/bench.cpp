#include "tsbench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace tsbench {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::ConfigError, where + ": " + what);
}

template <class T>
T field(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) config_error(where + "." + key, "missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        config_error(where + "." + key, e.what());
    }
}

std::string format_real(real v, const char* fmt = "%.17g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string safe_name(const std::string& name) {
    std::string out = name;
    for (char& c : out)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
    return out;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
}

DataSource parse_source(const json& j, const fs::path& base_dir, const std::string& where, std::size_t index) {
    require_keys(j, {"name", "csv", "freq", "synth", "period"}, where);
    DataSource src;
    if (j.contains("csv") == j.contains("synth")) config_error(where, "exactly one of 'csv' or 'synth' is required");
    if (j.contains("csv")) {
        fs::path p = field<std::string>(j, "csv", where);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        if (!fs::exists(p)) config_error(where + ".csv", "file not found: " + p.string());
        src.csv = p;
        src.name = p.stem().string();
        src.freq = Frequency::parse(j.contains("freq") ? field<std::string>(j, "freq", where) : "1h");
    } else {
        const json& s = j.at("synth");
        src.synth = synth_spec_from_json(s, where + ".synth");
        src.name = s.contains("preset") ? s.at("preset").get<std::string>() : "synth" + std::to_string(index);
        src.freq = Frequency{FreqUnit::Hourly, 1};
        if (j.contains("freq")) config_error(where + ".freq", "synthetic series are hourly");
    }
    if (j.contains("name")) src.name = field<std::string>(j, "name", where);
    if (j.contains("period")) src.period = field<int>(j, "period", where);
    return src;
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
    const std::string root = "config";
    require_keys(j,
                 {"data", "split", "context_len", "horizons", "models", "seeds", "n_forecast_samples",
                  "characterization", "output_dir"},
                 root);
    ExperimentConfig cfg;
    cfg.source = j;

    if (!j.contains("data")) config_error(root + ".data", "missing");
    const json& data = j.at("data");
    if (data.is_object()) {
        cfg.data.push_back(parse_source(data, base_dir, root + ".data", 0));
    } else if (data.is_array() && !data.empty()) {
        for (std::size_t i = 0; i < data.size(); ++i)
            cfg.data.push_back(parse_source(data[i], base_dir, root + ".data[" + std::to_string(i) + "]", i));
    } else {
        config_error(root + ".data", "expected an object or a non-empty list");
    }
    std::set<std::string> names;
    for (const auto& d : cfg.data)
        if (!names.insert(d.name).second) config_error(root + ".data", "duplicate dataset name '" + d.name + "'");

    if (j.contains("split")) {
        const json& s = j.at("split");
        require_keys(s, {"val_len", "test_len"}, root + ".split");
        cfg.split.val_len = s.value("val_len", Eigen::Index{0});
        cfg.split.test_len = field<Eigen::Index>(s, "test_len", root + ".split");
    }
    if (j.contains("context_len")) cfg.context_len = field<Eigen::Index>(j, "context_len", root);
    if (j.contains("horizons")) cfg.horizons = field<std::vector<Eigen::Index>>(j, "horizons", root);
    if (j.contains("seeds")) cfg.seeds = field<std::vector<std::uint64_t>>(j, "seeds", root);
    if (j.contains("n_forecast_samples")) cfg.n_forecast_samples = field<int>(j, "n_forecast_samples", root);
    if (j.contains("output_dir")) {
        fs::path out = field<std::string>(j, "output_dir", root);
        cfg.output_dir = out.is_relative() && !base_dir.empty() ? base_dir / out : out;
    }
    if (j.contains("models")) {
        const json& models = j.at("models");
        if (!models.is_array()) config_error(root + ".models", "expected a list");
        std::set<std::string> labels;
        for (std::size_t i = 0; i < models.size(); ++i) {
            const std::string where = root + ".models[" + std::to_string(i) + "]";
            ModelSpec m = model_spec_from_json(models[i], where);
            if (models[i].contains("context_len") || models[i].contains("horizon") || models[i].contains("seed"))
                config_error(where, "context_len, horizon and seed are set at experiment level");
            m.context_len = cfg.context_len;
            m.horizon = cfg.horizons.empty() ? 1 : cfg.horizons.front();
            try {
                m.validate();
            } catch (const Error& e) {
                config_error(where, e.detail());
            }
            if (!labels.insert(m.label()).second) config_error(where + ".name", "duplicate model label '" + m.label() + "'");
            cfg.models.push_back(std::move(m));
        }
    }
    if (j.contains("characterization")) {
        const json& c = j.at("characterization");
        const std::string where = root + ".characterization";
        require_keys(c, {"period", "window_len", "n_bins", "method"}, where);
        auto& opt = cfg.characterization;
        if (c.contains("period")) opt.period = field<int>(c, "period", where);
        if (c.contains("window_len")) opt.window_len = field<int>(c, "window_len", where);
        if (c.contains("n_bins")) opt.n_bins = field<int>(c, "n_bins", where);
        if (c.contains("method")) {
            try {
                opt.method = parse_decomposition_method(field<std::string>(c, "method", where));
            } catch (const Error& e) {
                config_error(where + ".method", e.detail());
            }
        }
    }

    if (cfg.context_len < 1) config_error(root + ".context_len", "must be >= 1");
    if (cfg.n_forecast_samples < 1) config_error(root + ".n_forecast_samples", "must be >= 1");
    for (const auto t : cfg.horizons) {
        if (t < 1) config_error(root + ".horizons", "horizons must be >= 1");
        if (t > cfg.split.test_len)
            config_error(root + ".horizons", "horizon " + std::to_string(t) + " exceeds split.test_len " +
                                                 std::to_string(cfg.split.test_len));
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, path.string() + ": cannot open config");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
    try {
        return parse_config(j, path.parent_path());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

std::string config_hash(const json& config, std::int64_t seed_offset) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(config.dump() + "#" + std::to_string(seed_offset))));
    return buf;
}

Dataset load_source(const DataSource& src) {
    Dataset ds = src.csv ? load_wide_csv(*src.csv, src.freq) : gen_series(*src.synth, src.name);
    ds.name = src.name;
    return ds;
}

CellResult run_cell(const Dataset& ds, const ExperimentConfig& cfg, const ModelSpec& model, Eigen::Index horizon,
                    std::uint64_t seed) {
    CellResult cell;
    cell.dataset = ds.name;
    cell.model = model.label();
    cell.horizon = horizon;
    cell.seed = seed;

    const Split split = split_dataset(ds, cfg.split);
    const Scaler scaler = fit_scaler(split.train);
    const Eigen::Index l = cfg.context_len;

    ModelSpec spec = model;
    spec.context_len = l;
    spec.horizon = horizon;
    spec.seed = seed;

    const auto train_windows = make_windows(split.train, l, horizon, 1);
    const Eigen::Index first_origin = ds.n_steps() - cfg.split.test_len - 1;
    if (first_origin < l - 1)
        throw Error(ErrorCode::SeriesTooShort, "fewer than L steps precede the test segment");
    const auto test_windows = make_windows_from(ds, l, horizon, horizon, first_origin);

    const TrainedModel trained = fit(spec, train_windows, scaler);

    std::vector<SampleForecast> forecasts;
    std::vector<Matrix> targets;
    std::vector<real> step_abs(static_cast<std::size_t>(horizon), 0.0);
    for (const auto& w : test_windows) {
        SampleForecast fc = predict(trained, w, cfg.n_forecast_samples);
        const Matrix point = fc.n_samples() == 1 ? fc.paths.front() : fc.mean_path();
        const RowVector abs_err = (w.target - point).cwiseAbs().colwise().sum();
        for (Eigen::Index h = 0; h < horizon; ++h) step_abs[static_cast<std::size_t>(h)] += abs_err(h);
        forecasts.push_back(std::move(fc));
        targets.push_back(w.target);
    }
    Matrix target(ds.n_variates(), horizon * static_cast<Eigen::Index>(targets.size()));
    for (std::size_t i = 0; i < targets.size(); ++i)
        target.middleCols(static_cast<Eigen::Index>(i) * horizon, horizon) = targets[i];

    cell.report = evaluate(target, SampleForecast::concat_time(forecasts));
    cell.n_test_windows = test_windows.size();
    const real denom = static_cast<real>(test_windows.size() * static_cast<std::size_t>(ds.n_variates()));
    for (auto& v : step_abs) v /= denom;
    cell.per_step_mae = std::move(step_abs);
    return cell;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << "dataset,model,horizon,metric,mean,std,n_seeds\n";
    for (const auto& r : rows)
        out << r.dataset << ',' << r.model << ',' << r.horizon << ',' << r.metric << ',' << format_real(r.mean) << ','
            << format_real(r.std) << ',' << r.n_seeds << '\n';
    return out.str();
}

BenchmarkResult run_benchmark(const ExperimentConfig& cfg, const RunOptions& opt) {
    if (cfg.horizons.empty()) throw Error(ErrorCode::ConfigError, "config.horizons: must be non-empty");
    if (cfg.models.empty()) throw Error(ErrorCode::ConfigError, "config.models: must be non-empty");
    if (cfg.seeds.empty()) throw Error(ErrorCode::ConfigError, "config.seeds: must be non-empty");

    std::vector<Dataset> datasets;
    for (const auto& src : cfg.data) {
        Dataset ds = load_source(src);
        if (std::any_of(cfg.models.begin(), cfg.models.end(), [](const ModelSpec& m) { return m.use_covariates; }))
            ds = calendar_covariates(ds);
        datasets.push_back(std::move(ds));
    }

    struct CellKey {
        std::size_t dataset, model, horizon, seed;
    };
    std::vector<CellKey> keys;
    for (std::size_t d = 0; d < datasets.size(); ++d)
        for (std::size_t m = 0; m < cfg.models.size(); ++m)
            for (std::size_t h = 0; h < cfg.horizons.size(); ++h)
                for (std::size_t s = 0; s < cfg.seeds.size(); ++s) keys.push_back({d, m, h, s});

    BenchmarkResult result;
    result.cells.resize(keys.size());
    parallel_for(keys.size(), opt.threads, [&](std::size_t i) {
        const CellKey& k = keys[i];
        const auto seed = static_cast<std::uint64_t>(static_cast<std::int64_t>(cfg.seeds[k.seed]) + opt.seed_offset);
        try {
            result.cells[i] = run_cell(datasets[k.dataset], cfg, cfg.models[k.model], cfg.horizons[k.horizon], seed);
        } catch (const std::exception& e) {
            CellResult failed;
            failed.dataset = datasets[k.dataset].name;
            failed.model = cfg.models[k.model].label();
            failed.horizon = cfg.horizons[k.horizon];
            failed.seed = seed;
            failed.error = e.what();
            result.cells[i] = std::move(failed);
        }
    });

    const std::size_t n_seeds = cfg.seeds.size();
    for (std::size_t start = 0; start < keys.size(); start += n_seeds) {
        std::vector<MetricReport> reports;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            const CellResult& c = result.cells[start + s];
            if (c.report) reports.push_back(*c.report);
            else result.any_failed = true;
        }
        if (reports.size() != n_seeds) continue;
        const CellResult& first = result.cells[start];
        for (const auto& f : aggregate_runs(reports))
            result.rows.push_back({first.dataset, first.model, first.horizon, f.metric, f.mean, f.std, n_seeds});
    }

    if (opt.write_files) {
        fs::create_directories(cfg.output_dir / "raw");
        write_text(cfg.output_dir / "results.csv", results_csv(result.rows));

        json rows = json::array();
        for (const auto& r : result.rows)
            rows.push_back({{"dataset", r.dataset}, {"model", r.model}, {"horizon", r.horizon}, {"metric", r.metric},
                            {"mean", r.mean}, {"std", r.std}, {"n_seeds", r.n_seeds}});
        json errors = json::array();
        for (const auto& c : result.cells) {
            if (!c.error.empty())
                errors.push_back({{"dataset", c.dataset}, {"model", c.model}, {"horizon", c.horizon}, {"seed", c.seed},
                                  {"error", c.error}});
            if (!c.report) continue;
            json raw = to_json(*c.report);
            raw["dataset"] = c.dataset;
            raw["model"] = c.model;
            raw["horizon"] = c.horizon;
            raw["seed"] = c.seed;
            raw["n_test_windows"] = c.n_test_windows;
            raw["per_step_mae"] = c.per_step_mae;
            write_text(cfg.output_dir / "raw" /
                           (safe_name(c.dataset) + "__" + safe_name(c.model) + "__h" + std::to_string(c.horizon) +
                            "__seed" + std::to_string(c.seed) + ".json"),
                       raw.dump(2) + "\n");
        }
        const json doc{
            {"provenance",
             {{"config_hash", config_hash(cfg.source, opt.seed_offset)},
              {"toolkit_version", std::string(kToolkitVersion)},
              {"timestamp", utc_now()},
              {"seed_offset", opt.seed_offset}}},
            {"protocol",
             {{"context_len", cfg.context_len},
              {"val_len", cfg.split.val_len},
              {"test_len", cfg.split.test_len},
              {"test_window_stride", "horizon (non-overlapping)"},
              {"train_window_stride", 1},
              {"n_forecast_samples", cfg.n_forecast_samples},
              {"point_statistic", "sample mean"},
              {"crps", "normalized by sum |x|"}}},
            {"rows", rows},
            {"errors", errors}};
        write_text(cfg.output_dir / "results.json", doc.dump(2) + "\n");
    }
    return result;
}

CharacterizeResult run_characterize(const ExperimentConfig& cfg, bool write_files) {
    CharacterizeResult res;
    for (const auto& src : cfg.data) {
        const Dataset ds = load_source(src);
        CharacterizationOptions opt = cfg.characterization;
        if (src.period) opt.period = *src.period;
        try {
            res.reports.push_back(characterize_dataset(ds, opt));
        } catch (const Error& e) {
            throw Error(e.code(), "dataset '" + src.name + "': " + e.detail());
        }
        res.names.push_back(src.name);
    }
    if (write_files) {
        fs::create_directories(cfg.output_dir);
        for (std::size_t i = 0; i < res.names.size(); ++i)
            write_text(cfg.output_dir / ("characterization_" + safe_name(res.names[i]) + ".json"),
                       to_json(res.reports[i]).dump(2) + "\n");

        std::ostringstream csv;
        csv << "metric";
        for (const auto& n : res.names) csv << ',' << n;
        csv << '\n';
        auto row = [&](const char* label, auto getter) {
            csv << label;
            for (const auto& r : res.reports) csv << ',' << format_real(static_cast<real>(getter(r)), "%.10g");
            csv << '\n';
        };
        row("trend_strength", [](const CharacterizationReport& r) { return r.trend_strength; });
        row("seasonality_strength", [](const CharacterizationReport& r) { return r.seasonality_strength; });
        row("js_divergence", [](const CharacterizationReport& r) { return r.js_divergence; });
        row("outlier_local_pct", [](const CharacterizationReport& r) { return r.outlier_local_pct; });
        row("outlier_global_pct", [](const CharacterizationReport& r) { return r.outlier_global_pct; });
        row("period", [](const CharacterizationReport& r) { return r.period; });
        row("window_len", [](const CharacterizationReport& r) { return r.window_len; });
        row("n_bins", [](const CharacterizationReport& r) { return r.n_bins; });
        row("skipped_windows", [](const CharacterizationReport& r) { return r.skipped_windows; });
        write_text(cfg.output_dir / "characterization.csv", csv.str());
    }
    return res;
}

Dataset write_synth_csv(const SynthSpec& spec, const fs::path& out, const std::string& name) {
    Dataset ds = gen_series(spec, name);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_wide_csv(ds, out);
    return ds;
}

}  // namespace tsbench
