#pragma once

#include "tsbench/characterize.hpp"
#include "tsbench/data.hpp"
#include "tsbench/metrics.hpp"
#include "tsbench/models.hpp"
#include "tsbench/serialize.hpp"
#include "tsbench/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tsbench {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

/// One dataset entry: either a wide CSV or a synthetic spec.
struct DataSource {
    std::string name;
    std::optional<std::filesystem::path> csv;
    Frequency freq;
    std::optional<SynthSpec> synth;
    /// Overrides the experiment-level characterization period.
    std::optional<int> period;
};

struct ExperimentConfig {
    std::vector<DataSource> data;
    SplitSpec split;
    Eigen::Index context_len = 96;
    std::vector<Eigen::Index> horizons;
    std::vector<ModelSpec> models;
    std::vector<std::uint64_t> seeds;
    int n_forecast_samples = 100;
    CharacterizationOptions characterization;
    std::filesystem::path output_dir = "tsbench_out";
    /// The parsed document, used for the provenance hash.
    json source;
};

/// Strict parse: unknown keys are errors. Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical dump of the config.
std::string config_hash(const json& config, std::int64_t seed_offset);

Dataset load_source(const DataSource& src);

struct ResultRow {
    std::string dataset;
    std::string model;
    Eigen::Index horizon = 0;
    std::string metric;
    real mean = 0;
    real std = 0;
    std::size_t n_seeds = 0;
};

/// Outcome of one (dataset, model, horizon, seed) cell.
struct CellResult {
    std::string dataset;
    std::string model;
    Eigen::Index horizon = 0;
    std::uint64_t seed = 0;
    std::optional<MetricReport> report;
    /// Mean absolute error of the point path per horizon step, pooled over
    /// test windows and variates.
    std::vector<real> per_step_mae;
    std::size_t n_test_windows = 0;
    std::string error;
};

struct BenchmarkResult {
    std::vector<ResultRow> rows;
    std::vector<CellResult> cells;
    bool any_failed = false;
};

struct RunOptions {
    int threads = 1;
    std::int64_t seed_offset = 0;
    bool write_files = true;
};

/// Runs every cell of the grid, aggregates across seeds and (optionally)
/// writes results.csv, results.json and raw/*.json under the output dir.
BenchmarkResult run_benchmark(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// Evaluates one cell: split, scale on train, fit, forecast each
/// non-overlapping test window and score the pooled forecasts.
CellResult run_cell(const Dataset& ds, const ExperimentConfig& cfg, const ModelSpec& model,
                    Eigen::Index horizon, std::uint64_t seed);

struct CharacterizeResult {
    std::vector<std::string> names;
    std::vector<CharacterizationReport> reports;
};

/// Characterizes every dataset; writes characterization_<name>.json and
/// characterization.csv when `write_files`.
CharacterizeResult run_characterize(const ExperimentConfig& cfg, bool write_files = true);

/// Writes the rows as CSV with columns dataset,model,horizon,metric,mean,std,n_seeds.
std::string results_csv(const std::vector<ResultRow>& rows);

/// Generates `spec` and writes it as a wide CSV.
Dataset write_synth_csv(const SynthSpec& spec, const std::filesystem::path& out, const std::string& name = "synth");

}  // namespace tsbench
