#include "fcmon/features.hpp"

#include <algorithm>

#include "fcmon/errors.hpp"

namespace fcmon {

void FeatureSpec::validate() const {
    if (lags.empty()) throw ConfigError("lags", "at least one lag is required");
    for (long j : lags)
        if (j < 1) throw ConfigError("lags", "lags must be positive");
    if (slots_per_day < 1) throw ConfigError("slots_per_day", "must be positive");
    if (include_dow_dummies && days_per_week < 2) throw ConfigError("days_per_week", "must be >= 2");
    if (include_hour_dummies && (slots_per_day % 4 != 0 || slots_per_day < 8))
        throw ConfigError("slots_per_day", "hour dummies need a multiple of 4 slots (>= 8)");
}

long FeatureSpec::max_lag() const { return *std::max_element(lags.begin(), lags.end()); }
long FeatureSpec::min_lag() const { return *std::min_element(lags.begin(), lags.end()); }

std::size_t FeatureSpec::n_features(std::size_t n_streams) const {
    std::size_t p = lags.size() * n_streams;
    if (include_trend) p += 1;
    if (include_dow_dummies) p += static_cast<std::size_t>(days_per_week - 1);
    if (include_hour_dummies) p += static_cast<std::size_t>(slots_per_day / 4 - 1);
    return p;
}

namespace {

std::vector<long> sorted_lags(const FeatureSpec& spec) {
    auto lags = spec.lags;
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    return lags;
}

}  // namespace

std::vector<std::string> FeatureSpec::column_names(const StreamSet& streams) const {
    std::vector<std::string> names;
    for (long j : sorted_lags(*this))
        for (const auto& id : streams.stream_ids()) names.push_back("lag" + std::to_string(j) + "_" + id);
    if (include_trend) names.emplace_back("trend");
    if (include_dow_dummies)
        for (long d = 1; d < days_per_week; ++d) names.push_back("dow_" + std::to_string(d));
    if (include_hour_dummies)
        for (long h = 1; h < slots_per_day / 4; ++h) names.push_back("hour_" + std::to_string(h));
    return names;
}

void feature_vector(const StreamSet& streams, const FeatureSpec& spec, long target_tick, std::span<double> out,
                    long available_until) {
    if (target_tick <= spec.max_lag())
        throw InsufficientHistory("tick " + std::to_string(target_tick) + " needs lag history of " +
                                  std::to_string(spec.max_lag()));
    if (available_until >= 0 && target_tick - spec.min_lag() > available_until)
        throw LeakageError("features of tick " + std::to_string(target_tick) + " read past tick " +
                           std::to_string(available_until));
    if (out.size() != spec.n_features(streams.n_streams())) throw ShapeError("feature buffer has wrong length");

    std::size_t k = 0;
    for (long j : sorted_lags(spec)) {
        auto row = streams.row(target_tick - j);
        std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(k));
        k += row.size();
    }
    if (spec.include_trend) out[k++] = static_cast<double>(target_tick) / static_cast<double>(spec.slots_per_day);

    const long day = (target_tick - 1) / spec.slots_per_day;
    if (spec.include_dow_dummies) {
        const long dow = day % spec.days_per_week;
        for (long d = 1; d < spec.days_per_week; ++d) out[k++] = dow == d ? 1.0 : 0.0;
    }
    if (spec.include_hour_dummies) {
        const long hour = ((target_tick - 1) % spec.slots_per_day) / 4;
        for (long h = 1; h < spec.slots_per_day / 4; ++h) out[k++] = hour == h ? 1.0 : 0.0;
    }
}

std::vector<double> feature_vector(const StreamSet& streams, const FeatureSpec& spec, long target_tick,
                                   long available_until) {
    std::vector<double> out(spec.n_features(streams.n_streams()));
    feature_vector(streams, spec, target_tick, out, available_until);
    return out;
}

DesignMatrix training_set(const StreamSet& streams, const FeatureSpec& spec, std::size_t target_stream,
                          long window_end, long window_days) {
    if (target_stream >= streams.n_streams()) throw InvalidArgument("target stream out of range");
    if (window_end > streams.n_ticks()) throw InvalidArgument("window extends past the last tick");
    const long first = std::max(window_end - window_days * spec.slots_per_day + 1, spec.max_lag() + 1);
    if (first > window_end)
        throw InsufficientHistory("training window ending at tick " + std::to_string(window_end) +
                                  " has no tick with full lag history");

    DesignMatrix dm;
    dm.column_names = spec.column_names(streams);
    const std::size_t p = dm.column_names.size();
    const auto n = static_cast<std::size_t>(window_end - first + 1);
    dm.x.resize(n * p);
    dm.y.reserve(n);
    dm.ticks.reserve(n);
    for (long t = first; t <= window_end; ++t) {
        const auto i = dm.y.size();
        feature_vector(streams, spec, t, std::span<double>(dm.x.data() + i * p, p));
        dm.y.push_back(streams.at(t, target_stream));
        dm.ticks.push_back(t);
    }
    return dm;
}

}  // namespace fcmon
