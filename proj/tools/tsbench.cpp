// tsbench: characterize datasets, run forecasting benchmarks, write synthetic series.

#include "tsbench/bench.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitCellFailure = 1;
constexpr int kExitConfigError = 2;

std::int64_t seed_offset_from_env() {
    const char* raw = std::getenv("TSBENCH_SEED_OFFSET");
    if (raw == nullptr || *raw == '\0') return 0;
    try {
        std::size_t used = 0;
        const long long v = std::stoll(raw, &used);
        if (used != std::string(raw).size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw tsbench::Error(tsbench::ErrorCode::ConfigError,
                             std::string("TSBENCH_SEED_OFFSET: not an integer: '") + raw + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-horizon forecasting benchmark toolkit"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "Worker threads for independent cells")->check(CLI::PositiveNumber);

    std::string config_path;
    auto* characterize = app.add_subcommand("characterize", "Trend/seasonality/Gaussianity/outlier report per dataset");
    characterize->add_option("-c,--config", config_path, "Experiment config (JSON)")->required();

    auto* benchmark = app.add_subcommand("benchmark", "Fit, forecast and score every configured cell");
    benchmark->add_option("-c,--config", config_path, "Experiment config (JSON)")->required();
    benchmark->add_option("--threads", threads, "Worker threads for independent cells")->check(CLI::PositiveNumber);

    std::string preset_name;
    std::string spec_path;
    std::string out_path;
    auto* synth = app.add_subcommand("synth", "Write a synthetic series as a wide CSV");
    auto* preset_opt = synth->add_option("--preset", preset_name, "Preset name");
    auto* spec_opt = synth->add_option("--spec", spec_path, "SynthSpec JSON file");
    preset_opt->excludes(spec_opt);
    synth->add_option("-o,--out", out_path, "Output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*characterize) {
            const auto cfg = tsbench::load_config(config_path);
            const auto res = tsbench::run_characterize(cfg);
            for (std::size_t i = 0; i < res.names.size(); ++i) {
                const auto& r = res.reports[i];
                std::cout << res.names[i] << ": F_T=" << r.trend_strength << " F_S=" << r.seasonality_strength
                          << " JS=" << r.js_divergence << " outliers(global/local %)=" << r.outlier_global_pct << "/"
                          << r.outlier_local_pct << "\n";
            }
            std::cout << "wrote " << (cfg.output_dir / "characterization.csv").string() << "\n";
            return 0;
        }
        if (*benchmark) {
            const auto cfg = tsbench::load_config(config_path);
            tsbench::RunOptions opt;
            opt.threads = threads;
            opt.seed_offset = seed_offset_from_env();
            const auto res = tsbench::run_benchmark(cfg, opt);
            std::size_t failed = 0;
            for (const auto& c : res.cells) {
                if (c.error.empty()) continue;
                ++failed;
                std::cerr << "cell failed: " << c.dataset << "/" << c.model << "/h" << c.horizon << "/seed" << c.seed
                          << ": " << c.error << "\n";
            }
            std::cout << res.cells.size() - failed << "/" << res.cells.size() << " cells succeeded; wrote "
                      << (cfg.output_dir / "results.csv").string() << "\n";
            return res.any_failed ? kExitCellFailure : 0;
        }
        if (*synth) {
            tsbench::SynthSpec spec;
            std::string name = "synth";
            if (!preset_name.empty()) {
                spec = tsbench::preset(preset_name);
                name = preset_name;
            } else if (!spec_path.empty()) {
                std::ifstream in(spec_path);
                if (!in) throw tsbench::Error(tsbench::ErrorCode::ConfigError, spec_path + ": cannot open");
                spec = tsbench::synth_spec_from_json(tsbench::json::parse(in), spec_path);
            } else {
                throw tsbench::Error(tsbench::ErrorCode::ConfigError, "synth needs --preset or --spec");
            }
            const auto ds = tsbench::write_synth_csv(spec, out_path, name);
            std::cout << "wrote " << ds.n_steps() << " steps x " << ds.n_variates() << " variates to " << out_path
                      << "\n";
            return 0;
        }
    } catch (const tsbench::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return 0;
}
