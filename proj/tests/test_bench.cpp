#include "test_util.hpp"
#include "tsbench/bench.hpp"

#include <cstdlib>
#include <sstream>

using namespace tsbench;
using tsbench::testing::temp_dir;
using tsbench::testing::write_file;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliRun run_cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" TSBENCH_CLI_PATH "\" " + args + " > \"" +
                            out.string() + "\" 2> \"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

json small_config(const fs::path& out_dir) {
    return json::parse(R"({
        "data": [{"name": "seasonal", "synth": {"preset": "seasonal_dominant", "n_steps": 600, "n_variates": 2}}],
        "split": {"val_len": 48, "test_len": 96},
        "context_len": 24,
        "horizons": [12, 24],
        "models": [{"family": "linear_nar", "ridge_lambda": 0.1},
                   {"family": "gaussian_linear_ar", "name": "gar", "ar_order": 2}],
        "seeds": [1, 2],
        "n_forecast_samples": 20,
        "characterization": {"period": 24, "window_len": 96},
        "output_dir": ")" + out_dir.string() + R"("
    })");
}

}  // namespace

TEST_CASE("config parsing") {
    const fs::path dir = temp_dir("cfg");
    const ExperimentConfig cfg = parse_config(small_config(dir / "out"), dir);
    CHECK(cfg.data.size() == 1);
    CHECK(cfg.data[0].name == "seasonal");
    CHECK(cfg.data[0].synth->n_steps == 600);
    CHECK(cfg.data[0].synth->amplitude == 1.0);
    CHECK(cfg.horizons == std::vector<Eigen::Index>{12, 24});
    CHECK(cfg.models.size() == 2);
    CHECK(cfg.models[1].label() == "gar");
    CHECK(cfg.models[1].ar_order == 2);
    CHECK(cfg.characterization.window_len == 96);

    auto expect_config_error = [&](json j, const std::string& fragment) {
        try {
            parse_config(j, dir);
            FAIL("expected ConfigError for " << fragment);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ConfigError);
            CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
        }
    };
    json j = small_config(dir);
    j["colour"] = 1;
    expect_config_error(j, "config.colour");
    j = small_config(dir);
    j["models"][0]["colour"] = 1;
    expect_config_error(j, "config.models[0].colour");
    j = small_config(dir);
    j["horizons"] = {200};
    expect_config_error(j, "config.horizons");
    j = small_config(dir);
    j["models"][0]["horizon"] = 5;
    expect_config_error(j, "config.models[0]");
    j = small_config(dir);
    j["data"][0]["csv"] = "x.csv";
    expect_config_error(j, "config.data[0]");
    j = small_config(dir);
    j["data"][0].erase("synth");
    j["data"][0]["csv"] = "nowhere.csv";
    expect_config_error(j, "config.data[0].csv");
    j = small_config(dir);
    j["models"][1]["name"] = "linear_nar";
    expect_config_error(j, "config.models");
}

TEST_CASE("config hash depends on content and seed offset") {
    const json a = small_config("x");
    json b = a;
    b["seeds"] = {1, 3};
    CHECK(config_hash(a, 0) == config_hash(a, 0));
    CHECK(config_hash(a, 0) != config_hash(b, 0));
    CHECK(config_hash(a, 0) != config_hash(a, 1));
    CHECK(config_hash(a, 0).size() == 16);
}

TEST_CASE("benchmark: constant series and a perfect baseline") {
    const fs::path dir = temp_dir("const");
    json j = small_config(dir / "out");
    j["data"][0]["synth"] = json::parse(R"({"n_steps": 400, "n_variates": 2, "level": 5.0, "seed": 1})");
    j["data"][0]["name"] = "flat";
    j["models"] = json::parse(R"([{"family": "global_mean"}, {"family": "batch_mean"}])");
    j["seeds"] = {1, 2, 3};
    const BenchmarkResult res = run_benchmark(parse_config(j, dir));
    CHECK_FALSE(res.any_failed);
    CHECK(res.rows.size() == 2 * 2 * MetricReport::field_names.size());
    for (const auto& r : res.rows) {
        CHECK(r.n_seeds == 3);
        CHECK(r.std == 0.0);
        if (r.metric == "nmae" || r.metric == "crps") CHECK(r.mean == 0.0);
    }
    const std::string csv = slurp(dir / "out" / "results.csv");
    CHECK(csv.rfind("dataset,model,horizon,metric,mean,std,n_seeds\n", 0) == 0);
    CHECK(csv.find("flat,global_mean,12,nmae,0,0,3\n") != std::string::npos);
}

TEST_CASE("benchmark: outputs, determinism and raw reports") {
    const fs::path dir = temp_dir("bench");
    const json j = small_config(dir / "out");
    const fs::path config = write_file(dir / "config.json", j.dump(2));

    const CliRun first = run_cli("benchmark -c \"" + config.string() + "\"", dir);
    REQUIRE_MESSAGE(first.exit_code == 0, first.err);
    const std::string csv1 = slurp(dir / "out" / "results.csv");
    const CliRun second = run_cli("--threads 2 benchmark -c \"" + config.string() + "\"", dir);
    REQUIRE(second.exit_code == 0);
    CHECK(slurp(dir / "out" / "results.csv") == csv1);
    const CliRun third = run_cli("benchmark --threads 3 -c \"" + config.string() + "\"", dir);
    REQUIRE(third.exit_code == 0);
    CHECK(slurp(dir / "out" / "results.csv") == csv1);

    // 1 dataset x 2 models x 2 horizons x 10 metrics plus header.
    CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 41);

    const json doc = json::parse(slurp(dir / "out" / "results.json"));
    CHECK(doc.at("provenance").at("toolkit_version") == std::string(kToolkitVersion));
    CHECK(doc.at("provenance").at("config_hash").get<std::string>().size() == 16);
    CHECK(doc.at("rows").size() == 40);
    CHECK(doc.at("errors").empty());

    // Every aggregate row is reproducible from the persisted per-seed reports.
    for (const auto& row : doc.at("rows")) {
        std::vector<MetricReport> reports;
        for (const int seed : {1, 2}) {
            const fs::path raw = dir / "out" / "raw" /
                                 (row.at("dataset").get<std::string>() + "__" + row.at("model").get<std::string>() +
                                  "__h" + std::to_string(row.at("horizon").get<int>()) + "__seed" +
                                  std::to_string(seed) + ".json");
            REQUIRE(fs::exists(raw));
            const json r = json::parse(slurp(raw));
            CHECK(r.at("per_step_mae").size() == row.at("horizon").get<std::size_t>());
            reports.push_back(metric_report_from_json(r));
        }
        for (const auto& f : aggregate_runs(reports)) {
            if (f.metric != row.at("metric").get<std::string>()) continue;
            CHECK(f.mean == row.at("mean").get<real>());
            CHECK(f.std == row.at("std").get<real>());
        }
    }

    const CliRun offset = run_cli("benchmark -c \"" + config.string() + "\"", dir, "TSBENCH_SEED_OFFSET=10");
    REQUIRE(offset.exit_code == 0);
    CHECK(fs::exists(dir / "out" / "raw" / "seasonal__gar__h12__seed11.json"));
    CHECK(slurp(dir / "out" / "results.csv") != csv1);

    const CliRun bad_env = run_cli("benchmark -c \"" + config.string() + "\"", dir, "TSBENCH_SEED_OFFSET=ten");
    CHECK(bad_env.exit_code == 2);
    CHECK(bad_env.err.find("TSBENCH_SEED_OFFSET") != std::string::npos);
}

TEST_CASE("benchmark: failing cells are recorded and the rest still run") {
    const fs::path dir = temp_dir("fail");
    json j = small_config(dir / "out");
    j["data"][0]["synth"] = json::parse(R"({"n_steps": 400, "level": 5.0})");
    j["data"][0]["name"] = "flat";
    // A constant series makes the unregularized design singular.
    j["models"] = json::parse(R"([{"family": "linear_nar"}, {"family": "global_mean"}])");
    const fs::path config = write_file(dir / "config.json", j.dump());
    const CliRun r = run_cli("benchmark -c \"" + config.string() + "\"", dir);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("SingularSystem") != std::string::npos);
    const json doc = json::parse(slurp(dir / "out" / "results.json"));
    CHECK(doc.at("errors").size() == 4);
    CHECK(doc.at("rows").size() == 20);
    for (const auto& row : doc.at("rows")) CHECK(row.at("model") == "global_mean");
}

TEST_CASE("characterize command") {
    const fs::path dir = temp_dir("char");
    json j = small_config(dir / "out");
    j["data"] = json::parse(R"([
        {"name": "trend", "synth": {"preset": "trend_dominant"}},
        {"name": "season", "synth": {"preset": "seasonal_dominant"}}])");
    j["characterization"] = json::parse(R"({"period": 24, "window_len": 336, "n_bins": 20, "method": "stl"})");
    const fs::path config = write_file(dir / "config.json", j.dump());
    const CliRun r = run_cli("characterize -c \"" + config.string() + "\"", dir);
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    const json trend = json::parse(slurp(dir / "out" / "characterization_trend.json"));
    const json season = json::parse(slurp(dir / "out" / "characterization_season.json"));
    CHECK(trend.at("trend_strength").get<real>() >= 0.99);
    CHECK(season.at("seasonality_strength").get<real>() >= 0.99);
    CHECK(trend.at("method") == "stl");

    const std::string csv = slurp(dir / "out" / "characterization.csv");
    CHECK(csv.rfind("metric,trend,season\n", 0) == 0);
    CHECK(csv.find("\ntrend_strength,") != std::string::npos);
    CHECK(csv.find("\nseasonality_strength,") != std::string::npos);
    CHECK(csv.find("\njs_divergence,") != std::string::npos);

    const CharacterizeResult direct = run_characterize(parse_config(j, dir), false);
    CHECK(direct.reports[0].trend_strength == trend.at("trend_strength").get<real>());
}

TEST_CASE("config errors exit with code 2 and name the field") {
    const fs::path dir = temp_dir("missing");
    json j = small_config(dir / "out");
    j["data"][0] = json::parse(R"({"name": "gone", "csv": "does_not_exist.csv", "freq": "h"})");
    const fs::path config = write_file(dir / "config.json", j.dump());
    for (const std::string cmd : {"characterize", "benchmark"}) {
        const CliRun r = run_cli(cmd + " -c \"" + config.string() + "\"", dir);
        CHECK(r.exit_code == 2);
        CHECK_MESSAGE(r.err.find("config.data[0].csv") != std::string::npos, r.err);
        CHECK(r.err.find("config.json") != std::string::npos);
    }
    const CliRun none = run_cli("benchmark -c \"" + (dir / "absent.json").string() + "\"", dir);
    CHECK(none.exit_code == 2);
}

TEST_CASE("csv datasets resolve relative to the config") {
    const fs::path dir = temp_dir("csvcfg");
    SynthSpec s = preset("seasonal_dominant");
    s.n_steps = 500;
    write_synth_csv(s, dir / "series.csv");
    json j = small_config(dir / "out");
    j["data"][0] = json::parse(R"({"name": "fromcsv", "csv": "series.csv", "freq": "h", "period": 24})");
    j["models"] = json::parse(R"([{"family": "nlinear"}, {"family": "dlinear", "ma_window": 5}])");
    const BenchmarkResult res = run_benchmark(parse_config(j, dir));
    CHECK_FALSE(res.any_failed);
    CHECK(res.rows.size() == 2 * 2 * 10);
}

TEST_CASE("synth command") {
    const fs::path dir = temp_dir("synth");
    const CliRun r = run_cli("synth --preset seasonal_dominant -o \"" + (dir / "s.csv").string() + "\"", dir);
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    const Dataset loaded = load_wide_csv(dir / "s.csv", Frequency::parse("h"));
    const Dataset generated = gen_series(preset("seasonal_dominant"));
    CHECK(loaded.values == generated.values);
    CHECK(loaded.timestamps == generated.timestamps);
    CharacterizationOptions opt;
    CHECK(characterize_dataset(loaded, opt).seasonality_strength >= 0.99);

    const fs::path spec = write_file(dir / "spec.json", R"({"n_steps": 50, "n_variates": 2, "trend": {"slope": 0.5},
        "noise": {"kind": "student_t", "sigma": 0.2, "nu": 4}, "seed": 3})");
    const CliRun two = run_cli("synth --spec \"" + spec.string() + "\" -o \"" + (dir / "two.csv").string() + "\"", dir);
    REQUIRE_MESSAGE(two.exit_code == 0, two.err);
    std::ifstream in(dir / "two.csv");
    std::string header;
    std::getline(in, header);
    CHECK(std::count(header.begin(), header.end(), ',') == 2);

    const fs::path bad = write_file(dir / "bad.json", R"({"n_steps": 0})");
    CHECK(run_cli("synth --spec \"" + bad.string() + "\" -o \"" + (dir / "bad.csv").string() + "\"", dir).exit_code == 2);
    const CliRun unknown = run_cli("synth --preset nope -o \"" + (dir / "x.csv").string() + "\"", dir);
    CHECK(unknown.exit_code == 2);
    CHECK(unknown.err.find("UnknownPreset") != std::string::npos);
}
