#pragma once

#include <span>
#include <string>
#include <vector>

#include "fcmon/stream.hpp"

namespace fcmon {

/// Predictor layout for the per-stream forecast model.
///
/// Column order is fixed:
///   1. lagged values, grouped by lag (ascending), then by stream:
///      lag{j}_{stream_id} for j in lags, stream in stream order
///   2. `trend` = tick / slots_per_day
///   3. `dow_1` .. `dow_{days_per_week-1}` (level 0 is the reference)
///   4. `hour_1` .. `hour_{slots_per_day/4-1}` (level 0 is the reference)
///
/// Tick t falls on day (t-1)/slots_per_day, weekday day % days_per_week, and
/// slot (t-1) % slots_per_day within the day; four slots make an hour.
struct FeatureSpec {
    std::vector<long> lags{60, 420};
    long slots_per_day = 60;
    long days_per_week = 7;
    bool include_trend = true;
    bool include_hour_dummies = true;
    bool include_dow_dummies = true;

    /// Throws ConfigError when the spec is unusable.
    void validate() const;
    long max_lag() const;
    long min_lag() const;
    std::size_t n_features(std::size_t n_streams) const;
    std::vector<std::string> column_names(const StreamSet& streams) const;
};

struct DesignMatrix {
    std::vector<double> x;  // row-major, n_rows * n_cols
    std::vector<double> y;
    std::vector<long> ticks;  // target tick of each row
    std::vector<std::string> column_names;

    std::size_t n_rows() const noexcept { return y.size(); }
    std::size_t n_cols() const noexcept { return column_names.size(); }
    std::span<const double> row(std::size_t i) const { return {x.data() + i * n_cols(), n_cols()}; }
    double at(std::size_t i, std::size_t j) const { return x[i * n_cols() + j]; }
};

/// Writes the predictors for `target_tick` into `out` (size n_features).
/// Throws InsufficientHistory when target_tick <= max lag. With
/// available_until >= 0, throws LeakageError if a lag would read a tick
/// after it.
void feature_vector(const StreamSet& streams, const FeatureSpec& spec, long target_tick, std::span<double> out,
                    long available_until = -1);
std::vector<double> feature_vector(const StreamSet& streams, const FeatureSpec& spec, long target_tick,
                                   long available_until = -1);

/// Rows for every tick in (window_end - window_days*slots_per_day, window_end]
/// that has full lag history, with the target stream's value as response.
DesignMatrix training_set(const StreamSet& streams, const FeatureSpec& spec, std::size_t target_stream,
                          long window_end, long window_days);

}  // namespace fcmon
