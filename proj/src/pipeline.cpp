#include "fcmon/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "fcmon/errors.hpp"
#include "fcmon/keyvalue.hpp"
#include "fcmon/parallel.hpp"
#include "fcmon/seed.hpp"
#include "fcmon/text.hpp"

namespace fcmon {

namespace {

const char* reset_name(ResetMode m) { return m == ResetMode::RejectingBatch ? "rejecting_batch" : "next_batch"; }

ResetMode parse_reset(const std::string& v) {
    if (v == "rejecting_batch") return ResetMode::RejectingBatch;
    if (v == "next_batch") return ResetMode::NextBatch;
    throw ConfigError("policy.reset", "expected rejecting_batch or next_batch, got '" + v + "'");
}

const char* history_name(PeltHistory h) { return h == PeltHistory::Full ? "full" : "since_changepoint"; }

PeltHistory parse_history(const std::string& v) {
    if (v == "full") return PeltHistory::Full;
    if (v == "since_changepoint") return PeltHistory::SinceChangepoint;
    throw ConfigError("policy.pelt_history", "expected full or since_changepoint, got '" + v + "'");
}

std::string join_lags(const std::vector<long>& lags) {
    std::string s;
    for (std::size_t i = 0; i < lags.size(); ++i) s += (i ? "," : "") + std::to_string(lags[i]);
    return s;
}

std::string b(bool v) { return v ? "true" : "false"; }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

void scenario_keys(const RegimeScenario& s, std::map<std::string, std::string>& out) {
    out["scenario.n_streams"] = std::to_string(s.n_streams);
    out["scenario.n_days"] = std::to_string(s.n_days);
    out["scenario.slots_per_day"] = std::to_string(s.slots_per_day);
    out["scenario.days_per_week"] = std::to_string(s.days_per_week);
    out["scenario.noise_scale"] = format_double(s.noise_scale);
    out["scenario.correlation"] = format_double(s.correlation);
    out["scenario.flat_profile"] = b(s.flat_profile);
    out["scenario.seed"] = std::to_string(s.seed);
    std::string levels;
    for (std::size_t i = 0; i < s.base_levels.size(); ++i) levels += (i ? "," : "") + format_double(s.base_levels[i]);
    out["scenario.base_levels"] = levels;
    std::string shifts;
    for (std::size_t i = 0; i < s.shifts.size(); ++i)
        shifts += (i ? "," : "") + std::to_string(s.shifts[i].day) + ":" + std::to_string(s.shifts[i].stream) + ":" +
                  format_double(s.shifts[i].multiplier);
    out["scenario.shifts"] = shifts;
}

}  // namespace

void RunConfig::validate() const {
    features.validate();
    if (window_days < 1) throw ConfigError("window_days", "must be >= 1");
    const long B = effective_batch();
    const long Q = effective_horizon();
    if (B < 2) throw ConfigError("batch_size", "must be >= 2 (the mean test needs a variance)");
    if (Q < 1) throw ConfigError("horizon", "must be >= 1");
    if (Q > B) throw ConfigError("horizon", "horizon larger than the batch size is not observable at batch end");
    if (features.min_lag() < Q)
        throw ConfigError("lags", "smallest lag " + std::to_string(features.min_lag()) +
                                      " is shorter than the horizon " + std::to_string(Q));
    if (initial_origin() <= features.max_lag())
        throw ConfigError("window_days", "training window must be longer than the largest lag");
    if (forecaster == ModelKind::Naive &&
        std::find(features.lags.begin(), features.lags.end(), hyper.naive_lag) == features.lags.end())
        throw ConfigError("naive.lag", "naive lag must be one of the feature lags");
    if (policy.kind == PolicyKind::MeanTest && !(policy.alpha > 0.0 && policy.alpha < 1.0))
        throw ConfigError("policy.alpha", "must be in (0, 1)");
    if (policy.kind == PolicyKind::EveryKBatches && policy.k < 1) throw ConfigError("policy.k", "must be >= 1");
    if (policy.kind == PolicyKind::Pelt && policy.min_seg_len < 2)
        throw ConfigError("policy.min_seg_len", "must be >= 2");
    if (csv.empty()) {
        scenario.validate();
        if (scenario.slots_per_day != features.slots_per_day)
            throw ConfigError("slots_per_day", "differs from scenario.slots_per_day");
    }
}

std::map<std::string, std::string> RunConfig::data_keys() const {
    std::map<std::string, std::string> k;
    if (!csv.empty())
        k["data.csv"] = csv.string();
    else
        scenario_keys(scenario, k);
    return k;
}

std::map<std::string, std::string> RunConfig::to_keys() const {
    auto k = data_keys();
    k["forecaster"] = to_string(forecaster);
    k["forest.n_trees"] = std::to_string(hyper.forest.n_trees);
    k["forest.mtry"] = std::to_string(hyper.forest.mtry);
    k["forest.min_node_size"] = std::to_string(hyper.forest.min_node_size);
    k["forest.bootstrap"] = b(hyper.forest.bootstrap);
    k["boosting.n_rounds"] = std::to_string(hyper.boosting.n_rounds);
    k["boosting.max_depth"] = std::to_string(hyper.boosting.max_depth);
    k["boosting.learning_rate"] = format_double(hyper.boosting.learning_rate);
    k["boosting.min_split_gain"] = format_double(hyper.boosting.min_split_gain);
    k["boosting.colsample"] = format_double(hyper.boosting.colsample);
    k["boosting.min_child_weight"] = format_double(hyper.boosting.min_child_weight);
    k["boosting.subsample"] = format_double(hyper.boosting.subsample);
    k["lasso.n_lambda"] = std::to_string(hyper.lasso.n_lambda);
    k["lasso.lambda_min_ratio"] = format_double(hyper.lasso.lambda_min_ratio);
    k["lasso.tol"] = format_double(hyper.lasso.tol);
    k["lasso.max_iter"] = std::to_string(hyper.lasso.max_iter);
    k["naive.lag"] = std::to_string(hyper.naive_lag);
    k["policy"] = to_string(policy.kind);
    k["policy.alpha"] = format_double(policy.alpha);
    k["policy.penalty"] = format_double(policy.penalty);
    k["policy.min_seg_len"] = std::to_string(policy.min_seg_len);
    k["policy.k"] = std::to_string(policy.k);
    k["policy.reference_max_len"] = std::to_string(policy.reference_max_len);
    k["policy.reset"] = reset_name(policy.reset);
    k["policy.pelt_history"] = history_name(policy.pelt_history);
    k["window_days"] = std::to_string(window_days);
    k["batch_size"] = std::to_string(effective_batch());
    k["horizon"] = std::to_string(effective_horizon());
    k["slots_per_day"] = std::to_string(features.slots_per_day);
    k["days_per_week"] = std::to_string(features.days_per_week);
    k["lags"] = join_lags(features.lags);
    k["trend"] = b(features.include_trend);
    k["hour_dummies"] = b(features.include_hour_dummies);
    k["dow_dummies"] = b(features.include_dow_dummies);
    k["seed"] = std::to_string(seed);
    return k;
}

std::uint64_t RunConfig::hash() const {
    std::string text;
    for (const auto& [key, value] : to_keys()) text += key + "=" + value + "\n";
    return fnv1a64(text);
}

RunConfig config_from_keys(const std::map<std::string, std::string>& keys, const std::filesystem::path& base_dir) {
    using namespace kv;
    RunConfig c;
    std::map<std::string, std::string> scen;
    std::set<std::string> used;
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = keys.find(key);
        if (it == keys.end()) return nullptr;
        used.insert(key);
        return &it->second;
    };

    if (auto v = get("seed")) c.seed = static_cast<std::uint64_t>(to_long("seed", *v));
    const std::string* csv = get("data.csv");
    const std::string* scenario_file = get("data.scenario");
    if (csv && scenario_file) throw ConfigError("data", "give either data.csv or data.scenario, not both");
    bool has_inline = false;
    for (const auto& [key, value] : keys)
        if (key.rfind("scenario.", 0) == 0) {
            scen[key.substr(9)] = value;
            used.insert(key);
            has_inline = true;
        }
    if (csv) {
        if (has_inline) throw ConfigError("data", "scenario.* keys conflict with data.csv");
        c.csv = resolve(base_dir, *csv);
    } else {
        std::map<std::string, std::string> merged;
        if (scenario_file) {
            if (*scenario_file != "default") {
                merged = [&] {
                    std::ifstream in(resolve(base_dir, *scenario_file));
                    if (!in) throw ConfigError("data.scenario", "cannot open '" + *scenario_file + "'");
                    return kv::read(in);
                }();
            } else {
                merged["default"] = "true";
            }
        } else if (!has_inline) {
            throw ConfigError("data", "no data source: set data.csv, data.scenario or scenario.* keys");
        }
        for (const auto& [k, v] : scen) merged[k] = v;
        if (!merged.count("seed")) merged["seed"] = std::to_string(c.seed);
        c.scenario = scenario_from_keys(merged);
    }

    if (auto v = get("forecaster")) c.forecaster = parse_model_kind(*v);
    auto& h = c.hyper;
    if (auto v = get("forest.n_trees")) h.forest.n_trees = to_size("forest.n_trees", *v);
    if (auto v = get("forest.mtry")) h.forest.mtry = to_size("forest.mtry", *v);
    if (auto v = get("forest.min_node_size")) h.forest.min_node_size = to_size("forest.min_node_size", *v);
    if (auto v = get("forest.bootstrap")) h.forest.bootstrap = to_bool("forest.bootstrap", *v);
    if (auto v = get("boosting.n_rounds")) h.boosting.n_rounds = to_size("boosting.n_rounds", *v);
    if (auto v = get("boosting.max_depth")) h.boosting.max_depth = to_size("boosting.max_depth", *v);
    if (auto v = get("boosting.learning_rate")) h.boosting.learning_rate = to_double("boosting.learning_rate", *v);
    if (auto v = get("boosting.min_split_gain")) h.boosting.min_split_gain = to_double("boosting.min_split_gain", *v);
    if (auto v = get("boosting.colsample")) h.boosting.colsample = to_double("boosting.colsample", *v);
    if (auto v = get("boosting.min_child_weight"))
        h.boosting.min_child_weight = to_double("boosting.min_child_weight", *v);
    if (auto v = get("boosting.subsample")) h.boosting.subsample = to_double("boosting.subsample", *v);
    if (auto v = get("lasso.n_lambda")) h.lasso.n_lambda = to_size("lasso.n_lambda", *v);
    if (auto v = get("lasso.lambda_min_ratio")) h.lasso.lambda_min_ratio = to_double("lasso.lambda_min_ratio", *v);
    if (auto v = get("lasso.tol")) h.lasso.tol = to_double("lasso.tol", *v);
    if (auto v = get("lasso.max_iter")) h.lasso.max_iter = to_size("lasso.max_iter", *v);
    if (auto v = get("naive.lag")) h.naive_lag = to_long("naive.lag", *v);

    if (auto v = get("policy")) c.policy.kind = parse_policy_kind(*v);
    if (auto v = get("policy.alpha")) c.policy.alpha = to_double("policy.alpha", *v);
    if (auto v = get("policy.penalty")) c.policy.penalty = to_double("policy.penalty", *v);
    if (auto v = get("policy.min_seg_len")) c.policy.min_seg_len = to_size("policy.min_seg_len", *v);
    if (auto v = get("policy.k")) c.policy.k = to_long("policy.k", *v);
    if (auto v = get("policy.reference_max_len"))
        c.policy.reference_max_len = to_size("policy.reference_max_len", *v);
    if (auto v = get("policy.reset")) c.policy.reset = parse_reset(*v);
    if (auto v = get("policy.pelt_history")) c.policy.pelt_history = parse_history(*v);

    if (auto v = get("window_days")) c.window_days = to_long("window_days", *v);
    if (auto v = get("batch_size")) c.batch_size = to_long("batch_size", *v);
    if (auto v = get("horizon")) c.horizon = to_long("horizon", *v);
    if (auto v = get("slots_per_day")) c.features.slots_per_day = to_long("slots_per_day", *v);
    else if (c.csv.empty()) c.features.slots_per_day = c.scenario.slots_per_day;
    if (auto v = get("days_per_week")) c.features.days_per_week = to_long("days_per_week", *v);
    if (auto v = get("lags")) {
        c.features.lags.clear();
        for (auto item : split(*v, ','))
            if (!trim(item).empty()) c.features.lags.push_back(to_long("lags", item));
    }
    if (auto v = get("trend")) c.features.include_trend = to_bool("trend", *v);
    if (auto v = get("hour_dummies")) c.features.include_hour_dummies = to_bool("hour_dummies", *v);
    if (auto v = get("dow_dummies")) c.features.include_dow_dummies = to_bool("dow_dummies", *v);
    if (auto v = get("threads")) c.threads = static_cast<unsigned>(to_size("threads", *v));
    if (auto v = get("out")) c.out_dir = resolve(base_dir, *v);

    for (const auto& [key, value] : keys)
        if (!used.count(key)) throw ConfigError(key, "unknown key");
    c.validate();
    return c;
}

std::map<std::string, std::string> read_key_values(std::istream& in) { return kv::read(in); }

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
    return config_from_keys(kv::read(in), base_dir);
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open config file '" + path.string() + "'");
    return parse_run_config(in, path.parent_path());
}

RegimeScenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario", "cannot open scenario file '" + path.string() + "'");
    return scenario_from_keys(kv::read(in));
}

StreamSet load_data(const RunConfig& config) {
    if (!config.csv.empty()) return ingest_csv(config.csv, config.effective_batch());
    return gen_regime_streams(config.scenario).with_batch_size(config.effective_batch());
}

namespace {

ForecastModel fit_model(const RunConfig& c, const StreamSet& data, std::size_t stream, long window_end,
                        std::uint64_t seed) {
    if (c.forecaster == ModelKind::Naive) {
        auto m = fit_naive(c.hyper.naive_lag, c.effective_horizon(), c.features.column_names(data),
                           data.stream_ids()[stream]);
        m.trained_at = window_end;
        return m;
    }
    const auto dm = training_set(data, c.features, stream, window_end, c.window_days);
    ForecastModel m;
    switch (c.forecaster) {
        case ModelKind::Lasso: m = fit_lasso(dm, c.hyper.lasso); break;
        case ModelKind::Forest: m = fit_forest(dm, c.hyper.forest, seed); break;
        case ModelKind::Boosting: m = fit_boosting(dm, c.hyper.boosting, seed); break;
        case ModelKind::Naive: break;
    }
    m.trained_at = window_end;
    return m;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

RunLog run(const RunConfig& config) { return run(config, load_data(config)); }

RunLog run(const RunConfig& config, const StreamSet& data) {
    config.validate();
    const long B = config.effective_batch();
    const long Q = config.effective_horizon();
    const long b0 = config.initial_origin();
    const std::size_t D = data.n_streams();
    if (b0 >= data.n_ticks())
        throw InsufficientHistory("data ends at tick " + std::to_string(data.n_ticks()) +
                                  ", before the initial training window closes at tick " + std::to_string(b0));
    const long N = (data.n_ticks() - b0) / B;
    if (N < 1) throw InsufficientHistory("no complete evaluation batch after the initial window");

    RunLog log;
    log.stream_ids = data.stream_ids();
    log.forecaster = to_string(config.forecaster);
    log.policy = config.policy.label();
    log.seed = config.seed;
    log.config_hash = config.hash();

    std::vector<std::vector<BatchRecord>> per_stream(D);
    parallel_for(D, std::max(1u, config.threads), [&](std::size_t i) {
        const std::uint64_t stream_seed = derive_seed(config.seed, i);
        auto& records = per_stream[i];
        records.reserve(static_cast<std::size_t>(N));

        auto model = fit_model(config, data, i, b0, derive_seed(stream_seed, 0));
        std::uint64_t model_id = 0;
        MonitorState monitor(config.policy, 0);
        std::vector<double> x(config.features.n_features(D));

        for (long k = 1; k <= N; ++k) {
            const long origin = b0 + (k - 1) * B;
            const long batch_end = origin + B;
            BatchRecord rec;
            rec.stream = i;
            rec.batch_index = k;
            rec.origin = origin;
            rec.model_id = model_id;
            for (long q = 1; q <= Q; ++q) {
                const long t = origin + q;
                feature_vector(data, config.features, t, x, origin);
                rec.ticks.push_back(t);
                rec.forecasts.push_back(predict(model, x));
                rec.actuals.push_back(data.at(t, i));
            }
            rec.losses = squared_loss_batch(rec.actuals, rec.forecasts).losses;
            rec.decision = monitor.step(rec.losses, k);
            // A retrain after the last batch would never forecast; it is logged but not fit.
            if (rec.decision.retrain && k < N) {
                const auto start = std::chrono::steady_clock::now();
                model = fit_model(config, data, i, batch_end, derive_seed(stream_seed, static_cast<std::uint64_t>(k)));
                rec.retrain_seconds = seconds_since(start);
                ++model_id;
            }
            records.push_back(std::move(rec));
        }
    });

    log.records.reserve(D * static_cast<std::size_t>(N));
    for (long k = 0; k < N; ++k)
        for (std::size_t i = 0; i < D; ++i) log.records.push_back(std::move(per_stream[i][static_cast<std::size_t>(k)]));
    return log;
}

Comparison compare_policies(const std::vector<RunConfig>& configs) {
    if (configs.empty()) throw ConfigError("configs", "nothing to compare");
    const auto& first = configs.front();
    for (const auto& c : configs) {
        if (c.data_keys() != first.data_keys()) throw ConfigError("data", "configs use different data sources");
        if (c.seed != first.seed) throw ConfigError("seed", "configs use different seeds");
        if (c.effective_batch() != first.effective_batch()) throw ConfigError("batch_size", "configs differ");
        if (c.window_days != first.window_days) throw ConfigError("window_days", "configs differ");
    }
    const auto data = load_data(first);
    Comparison cmp;
    for (const auto& c : configs) {
        cmp.labels.push_back(std::string(to_string(c.forecaster)) + "/" + c.policy.label());
        cmp.logs.push_back(run(c, data));
        cmp.reports.push_back(build_report(cmp.logs.back()));
    }
    return cmp;
}

void write_comparison_csv(const Comparison& cmp, std::ostream& out) {
    out << "stream_id";
    for (const auto& l : cmp.labels) out << ',' << l << "_smape," << l << "_breaks";
    out << '\n';
    if (cmp.reports.empty()) return;
    const auto& streams = cmp.reports.front().streams;
    for (std::size_t s = 0; s < streams.size(); ++s) {
        out << streams[s].stream_id;
        for (const auto& r : cmp.reports)
            out << ',' << format_double(r.streams[s].smape) << ',' << r.streams[s].n_breaks;
        out << '\n';
    }
    out << "Average";
    for (const auto& r : cmp.reports) out << ',' << format_double(r.avg_smape) << ',' << format_double(r.avg_breaks);
    out << '\n';
}

void write_run_outputs(const RunLog& log, const Report& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name);
        if (!f) throw Error("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("forecasts.csv");
        write_forecasts_csv(log, f);
    }
    {
        auto f = open("decisions.csv");
        write_decisions_csv(log, f);
    }
    {
        auto f = open("report.csv");
        write_report_csv(report, f);
    }
    {
        auto f = open("report.json");
        write_report_json(report, f);
    }
}

}  // namespace fcmon
