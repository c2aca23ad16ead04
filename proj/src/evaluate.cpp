#include "fcmon/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "fcmon/errors.hpp"
#include "fcmon/text.hpp"

namespace fcmon {

double LossBatch::mean() const {
    if (losses.empty()) return 0.0;
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

LossBatch squared_loss_batch(std::span<const double> actuals, std::span<const double> forecasts) {
    if (actuals.size() != forecasts.size())
        throw ShapeError("actuals and forecasts differ in length (" + std::to_string(actuals.size()) + " vs " +
                         std::to_string(forecasts.size()) + ")");
    if (actuals.empty()) throw ShapeError("loss batch needs at least one point");
    LossBatch batch;
    batch.losses.reserve(actuals.size());
    for (std::size_t q = 0; q < actuals.size(); ++q) {
        const double e = actuals[q] - forecasts[q];
        batch.losses.push_back(e * e);
    }
    return batch;
}

double sape(double actual, double forecast) {
    const double denom = std::fabs(actual) + std::fabs(forecast);
    if (denom == 0.0) return 0.0;
    return std::min(100.0, 100.0 * std::fabs(actual - forecast) / denom);
}

std::vector<int> RunLog::r_history(std::size_t stream) const {
    std::vector<int> r;
    for (const auto& rec : records)
        if (rec.stream == stream) r.push_back(rec.decision.retrain ? 1 : 0);
    return r;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::optional<double> quantile(std::vector<double> values, double prob) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Report build_report(const RunLog& log) {
    if (log.records.empty()) throw EmptyLog("run log has no records");
    Report report;
    report.forecaster = log.forecaster;
    report.policy = log.policy;
    report.seed = log.seed;
    report.config_hash = log.config_hash;

    const std::size_t D = log.stream_ids.size();
    struct Acc {
        double sape_sum = 0.0;
        std::size_t points = 0;
        std::vector<long> breaks;
        double seconds = 0.0;
        double delay_sum = 0.0;
        std::size_t delays = 0;
    };
    std::vector<Acc> acc(D);
    for (const auto& rec : log.records) {
        if (rec.stream >= D) throw InvalidArgument("record refers to an unknown stream");
        auto& a = acc[rec.stream];
        for (std::size_t q = 0; q < rec.actuals.size(); ++q) a.sape_sum += sape(rec.actuals[q], rec.forecasts[q]);
        a.points += rec.actuals.size();
        if (rec.decision.retrain) a.breaks.push_back(rec.batch_index);
        a.seconds += rec.retrain_seconds;
        if (rec.decision.detection_delay) {
            a.delay_sum += static_cast<double>(*rec.decision.detection_delay);
            ++a.delays;
        }
    }

    for (std::size_t i = 0; i < D; ++i) {
        const auto& a = acc[i];
        StreamReport s;
        s.stream_id = log.stream_ids[i];
        s.n_points = a.points;
        s.smape = a.points ? a.sape_sum / static_cast<double>(a.points) : 0.0;
        s.n_breaks = a.breaks.size();
        std::vector<double> durations;
        long prev = 0;
        for (long b : a.breaks) {
            durations.push_back(static_cast<double>(b - prev));
            prev = b;
        }
        s.p50_duration = quantile(durations, 0.5);
        s.p90_duration = quantile(durations, 0.9);
        s.retrain_seconds = a.seconds;
        s.mean_detection_delay = a.delays ? a.delay_sum / static_cast<double>(a.delays) : 0.0;
        report.streams.push_back(std::move(s));
    }

    for (const auto& s : report.streams) {
        report.avg_smape += s.smape;
        report.avg_breaks += static_cast<double>(s.n_breaks);
        report.avg_retrain_seconds += s.retrain_seconds;
    }
    const double d = static_cast<double>(report.streams.size());
    report.avg_smape /= d;
    report.avg_breaks /= d;
    report.avg_retrain_seconds /= d;
    return report;
}

namespace {

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

void provenance(std::ostream& out, std::uint64_t hash, std::uint64_t seed) {
    out << "# config_hash=" << hex64(hash) << ",seed=" << seed << '\n';
}

}  // namespace

void write_report_csv(const Report& report, std::ostream& out) {
    provenance(out, report.config_hash, report.seed);
    out << "stream_id,smape,n_breaks,p50_duration,p90_duration,retrain_seconds\n";
    for (const auto& s : report.streams)
        out << s.stream_id << ',' << format_double(s.smape) << ',' << s.n_breaks << ',' << opt_text(s.p50_duration)
            << ',' << opt_text(s.p90_duration) << ',' << format_double(s.retrain_seconds) << '\n';
    out << "Average," << format_double(report.avg_smape) << ',' << format_double(report.avg_breaks) << ",NA,NA,"
        << format_double(report.avg_retrain_seconds) << '\n';
}

void write_report_json(const Report& report, std::ostream& out) {
    using nlohmann::json;
    json j;
    j["config_hash"] = hex64(report.config_hash);
    j["seed"] = report.seed;
    j["forecaster"] = report.forecaster;
    j["policy"] = report.policy;
    auto streams = json::array();
    for (const auto& s : report.streams) {
        json e;
        e["stream_id"] = s.stream_id;
        e["smape"] = s.smape;
        e["n_points"] = s.n_points;
        e["n_breaks"] = s.n_breaks;
        e["p50_duration"] = s.p50_duration ? json(*s.p50_duration) : json(nullptr);
        e["p90_duration"] = s.p90_duration ? json(*s.p90_duration) : json(nullptr);
        e["retrain_seconds"] = s.retrain_seconds;
        e["mean_detection_delay"] = s.mean_detection_delay;
        streams.push_back(std::move(e));
    }
    j["streams"] = std::move(streams);
    j["average"] = {{"smape", report.avg_smape},
                    {"n_breaks", report.avg_breaks},
                    {"retrain_seconds", report.avg_retrain_seconds}};
    out << j.dump(2) << '\n';
}

void write_decisions_csv(const RunLog& log, std::ostream& out) {
    provenance(out, log.config_hash, log.seed);
    out << "stream_id,batch_index,policy,decision,p_value,statistic\n";
    for (const auto& rec : log.records) {
        const auto& d = rec.decision;
        const char* what = d.warmup ? "warmup" : (d.retrain ? "retrain" : "keep");
        out << log.stream_ids[rec.stream] << ',' << rec.batch_index << ',' << log.policy << ',' << what << ',';
        if (d.test)
            out << format_double(d.test->p_value) << ',' << format_double(d.test->statistic);
        else
            out << "NA,NA";
        out << '\n';
    }
}

void write_forecasts_csv(const RunLog& log, std::ostream& out) {
    provenance(out, log.config_hash, log.seed);
    out << "stream_id,batch_index,origin,tick,actual,forecast,loss,model_id\n";
    for (const auto& rec : log.records)
        for (std::size_t q = 0; q < rec.ticks.size(); ++q)
            out << log.stream_ids[rec.stream] << ',' << rec.batch_index << ',' << rec.origin << ',' << rec.ticks[q]
                << ',' << format_double(rec.actuals[q]) << ',' << format_double(rec.forecasts[q]) << ','
                << format_double(rec.losses[q]) << ',' << rec.model_id << '\n';
}

namespace {

// Reads provenance and data rows of one of our CSVs.
template <class RowFn>
void read_csv(std::istream& in, const char* header, std::size_t fields, RunLog& log, RowFn&& on_row) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        auto v = trim(line);
        if (v.empty()) continue;
        if (v.front() == '#') {
            for (auto kv : split(v.substr(1), ',')) {
                auto parts = split(trim(kv), '=');
                if (parts.size() != 2) continue;
                if (parts[0] == "config_hash") log.config_hash = std::stoull(std::string(parts[1]), nullptr, 16);
                if (parts[0] == "seed") log.seed = std::stoull(std::string(parts[1]));
            }
            continue;
        }
        if (!have_header) {
            if (v != header) throw ParseError(line_no, std::string("expected header '") + header + "'");
            have_header = true;
            continue;
        }
        auto f = split(v, ',');
        if (f.size() != fields) throw ParseError(line_no, "wrong field count");
        try {
            on_row(f);
        } catch (const std::logic_error&) {
            throw ParseError(line_no, "malformed value");
        }
    }
}

}  // namespace

RunLog read_run_log(std::istream& forecasts_csv, std::istream& decisions_csv) {
    RunLog log;
    std::map<std::string, std::size_t> stream_index;
    std::map<std::pair<long, std::size_t>, BatchRecord> records;
    auto stream_of = [&](std::string_view id) {
        auto [it, inserted] = stream_index.try_emplace(std::string(id), log.stream_ids.size());
        if (inserted) log.stream_ids.emplace_back(id);
        return it->second;
    };

    read_csv(decisions_csv, "stream_id,batch_index,policy,decision,p_value,statistic", 6, log, [&](auto& f) {
        const auto s = stream_of(f[0]);
        const long b = std::stol(std::string(f[1]));
        auto& rec = records[{b, s}];
        rec.stream = s;
        rec.batch_index = b;
        log.policy = std::string(f[2]);
        rec.decision.warmup = f[3] == "warmup";
        rec.decision.retrain = f[3] == "retrain";
        if (f[4] != "NA") {
            TestResult t;
            t.p_value = std::stod(std::string(f[4]));
            t.statistic = std::stod(std::string(f[5]));
            t.reject = rec.decision.retrain;
            rec.decision.test = t;
        }
    });
    const auto seed = log.seed;
    const auto hash = log.config_hash;
    read_csv(forecasts_csv, "stream_id,batch_index,origin,tick,actual,forecast,loss,model_id", 8, log, [&](auto& f) {
        const auto s = stream_of(f[0]);
        const long b = std::stol(std::string(f[1]));
        auto& rec = records[{b, s}];
        rec.stream = s;
        rec.batch_index = b;
        rec.origin = std::stol(std::string(f[2]));
        rec.ticks.push_back(std::stol(std::string(f[3])));
        rec.actuals.push_back(std::stod(std::string(f[4])));
        rec.forecasts.push_back(std::stod(std::string(f[5])));
        rec.losses.push_back(std::stod(std::string(f[6])));
        rec.model_id = std::stoull(std::string(f[7]));
    });
    if (log.seed != seed || log.config_hash != hash)
        throw Error("forecast and decision files come from different runs");
    for (auto& [key, rec] : records) log.records.push_back(std::move(rec));
    return log;
}

}  // namespace fcmon
