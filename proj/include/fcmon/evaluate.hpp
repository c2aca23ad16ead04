#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcmon/monitor.hpp"

namespace fcmon {

struct LossBatch {
    std::vector<double> losses;
    long batch_index = 0;
    std::size_t stream = 0;

    double mean() const;
};

/// Elementwise squared forecast errors. Throws ShapeError on a length
/// mismatch or empty input.
LossBatch squared_loss_batch(std::span<const double> actuals, std::span<const double> forecasts);

/// Symmetric absolute percentage error, 100*|a-f|/(|a|+|f|), in [0, 100].
/// Defined as 0 when both values are 0.
double sape(double actual, double forecast);

/// Everything that happened to one stream in one evaluation batch.
struct BatchRecord {
    std::size_t stream = 0;
    long batch_index = 0;  // 1-based evaluation batch
    long origin = 0;       // tick at which the forecasts were made
    std::vector<long> ticks;
    std::vector<double> forecasts;
    std::vector<double> actuals;
    std::vector<double> losses;
    MonitorDecision decision;
    double retrain_seconds = 0.0;
    std::uint64_t model_id = 0;  // model that produced the forecasts
};

/// Append-only record of a run, ordered by (batch, stream).
struct RunLog {
    std::vector<std::string> stream_ids;
    std::string forecaster;
    std::string policy;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::vector<BatchRecord> records;

    /// 0/1 retrain flags of one stream, one per evaluation batch.
    std::vector<int> r_history(std::size_t stream) const;
};

struct StreamReport {
    std::string stream_id;
    double smape = 0.0;
    std::size_t n_points = 0;
    std::size_t n_breaks = 0;
    std::optional<double> p50_duration;
    std::optional<double> p90_duration;
    double retrain_seconds = 0.0;
    double mean_detection_delay = 0.0;  // Pelt only; 0 when no delays recorded
};

struct Report {
    std::string forecaster;
    std::string policy;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::vector<StreamReport> streams;
    // Unweighted means over streams.
    double avg_smape = 0.0;
    double avg_breaks = 0.0;
    double avg_retrain_seconds = 0.0;
};

/// Type-7 (linear interpolation) sample quantile; nullopt for empty input.
std::optional<double> quantile(std::vector<double> values, double prob);

/// Per-stream SMAPE over all evaluated points, break counts, and the number of
/// batches between consecutive retrains (the initial fit counts as batch 0).
/// Throws EmptyLog when the log has no records.
Report build_report(const RunLog& log);

/// `stream_id,smape,n_breaks,p50_duration,p90_duration,retrain_seconds`,
/// one row per stream plus an `Average` row. Lines starting with '#' carry
/// provenance (config hash and seed).
void write_report_csv(const Report& report, std::ostream& out);
void write_report_json(const Report& report, std::ostream& out);

/// `stream_id,batch_index,policy,decision,p_value,statistic`; decision is
/// one of warmup / keep / retrain. Missing test values are written as NA.
void write_decisions_csv(const RunLog& log, std::ostream& out);

/// `stream_id,batch_index,origin,tick,actual,forecast,loss,model_id`.
void write_forecasts_csv(const RunLog& log, std::ostream& out);

/// Rebuilds a RunLog (without timings or test statistics beyond what the
/// files hold) from the two CSVs above.
RunLog read_run_log(std::istream& forecasts_csv, std::istream& decisions_csv);

std::string hex64(std::uint64_t v);

}  // namespace fcmon
