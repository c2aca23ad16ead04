#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fcmon/evaluate.hpp"
#include "fcmon/features.hpp"
#include "fcmon/forecasters.hpp"
#include "fcmon/monitor.hpp"
#include "fcmon/simulate.hpp"
#include "fcmon/stream.hpp"

namespace fcmon {

/// One monitored forecasting run. Built from a flat key=value document
/// (see README for the keys) or directly in code.
struct RunConfig {
    std::filesystem::path csv;  // empty: generate from `scenario`
    RegimeScenario scenario;
    ModelKind forecaster = ModelKind::Forest;
    HyperParams hyper;
    MonitorPolicy policy;
    FeatureSpec features;
    long window_days = 180;
    long batch_size = 0;  // 0: slots_per_day
    long horizon = 0;     // 0: batch_size
    std::uint64_t seed = 1;
    unsigned threads = 1;  // streams processed in parallel; results do not depend on it
    std::filesystem::path out_dir;

    long effective_batch() const noexcept { return batch_size > 0 ? batch_size : features.slots_per_day; }
    long effective_horizon() const noexcept { return horizon > 0 ? horizon : effective_batch(); }
    /// Tick at which the initial training window ends.
    long initial_origin() const noexcept { return window_days * features.slots_per_day; }

    /// Checks everything that does not need the data. Throws ConfigError.
    void validate() const;

    /// Canonical key=value form. Excludes `threads` and `out`, which do not
    /// affect results.
    std::map<std::string, std::string> to_keys() const;
    std::uint64_t hash() const;
    /// Keys describing the data source only.
    std::map<std::string, std::string> data_keys() const;
};

/// Parses `key = value` lines; '#' starts a comment. Relative paths in
/// data.csv / data.scenario resolve against `base_dir`. Unknown keys and bad
/// values throw ConfigError naming the key.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
/// Throws ConfigError (field "config") when the file cannot be opened.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig config_from_keys(const std::map<std::string, std::string>& keys,
                           const std::filesystem::path& base_dir = {});

/// Reads `key = value` lines into a map (no interpretation).
std::map<std::string, std::string> read_key_values(std::istream& in);
RegimeScenario load_scenario(const std::filesystem::path& path);

StreamSet load_data(const RunConfig& config);

/// Runs the monitored forecasting loop over every stream:
///   - initial fit on the window ending at the initial origin b0
///   - for evaluation batch k = 1..N (batch-end b_k = b0 + k*B): forecast
///     ticks b_{k-1}+1 .. b_{k-1}+Q with the current model, compute the
///     squared-loss batch, step the monitor, and refit on the window ending at
///     b_k when it says so.
/// Throws InsufficientHistory when the data holds no evaluation batch.
RunLog run(const RunConfig& config);
RunLog run(const RunConfig& config, const StreamSet& data);

struct Comparison {
    std::vector<std::string> labels;  // forecaster/policy
    std::vector<RunLog> logs;
    std::vector<Report> reports;
};

/// Runs every config on one shared data set. Configs must agree on the data
/// source, seed and geometry; otherwise ConfigError.
Comparison compare_policies(const std::vector<RunConfig>& configs);

/// `stream_id,<label>_smape,<label>_breaks,...` with an Average row.
void write_comparison_csv(const Comparison& cmp, std::ostream& out);

/// forecasts.csv, decisions.csv, report.csv, report.json under `dir`.
void write_run_outputs(const RunLog& log, const Report& report, const std::filesystem::path& dir);

}  // namespace fcmon
