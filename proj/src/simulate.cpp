#include "fcmon/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "fcmon/errors.hpp"
#include "fcmon/keyvalue.hpp"
#include "fcmon/parallel.hpp"
#include "fcmon/seed.hpp"
#include "fcmon/text.hpp"

namespace fcmon {

double RandomSource::chi_square5() {
    double s = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double z = gaussian();
        s += z * z;
    }
    return s;
}

RandomSource random_source(std::uint64_t seed) { return RandomSource(seed); }

const char* to_string(NullDistribution d) {
    return d == NullDistribution::Gaussian ? "gaussian" : "chisq5";
}

NullDistribution parse_null_distribution(const std::string& name) {
    if (name == "gaussian") return NullDistribution::Gaussian;
    if (name == "chisq5" || name == "chisquare5" || name == "chisq") return NullDistribution::ChiSquare5;
    throw ConfigError("dist", "unknown distribution '" + name + "' (gaussian, chisq5)");
}

void NullStudyConfig::validate() const {
    if (batch_size < 2) throw ConfigError("batch", "batch size must be >= 2");
    if (stream_length < 2 * batch_size) throw ConfigError("length", "stream must hold at least two batches");
    if (n_replications < 1) throw ConfigError("reps", "need at least one replication");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "alpha must be in [0, 1]");
}

NullStudyResult run_null_study(const NullStudyConfig& config, unsigned threads) {
    config.validate();
    std::vector<NullStudyResult> per_rep(config.n_replications);
    auto policy = MonitorPolicy::mean_test(config.alpha);
    policy.reset = config.reset;
    const std::size_t n_batches = config.stream_length / config.batch_size;

    parallel_for(config.n_replications, threads, [&](std::size_t rep) {
        RandomSource rng(derive_seed(config.seed, rep));
        MonitorState state(policy);
        std::vector<double> batch(config.batch_size);
        NullStudyResult res;
        for (std::size_t b = 0; b < n_batches; ++b) {
            for (double& x : batch)
                x = config.distribution == NullDistribution::Gaussian ? rng.gaussian() : rng.chi_square5();
            const auto index = static_cast<long>(b + 1);
            if (!state.warm()) {
                state.warmup(batch, index);
                continue;
            }
            ++res.tests;
            if (state.mean_test_step(batch, index).retrain) ++res.rejections;
        }
        per_rep[rep] = res;
    });

    NullStudyResult total;
    for (const auto& r : per_rep) {
        total.rejections += r.rejections;
        total.tests += r.tests;
    }
    return total;
}

void write_null_study_csv(const std::vector<std::pair<NullStudyConfig, NullStudyResult>>& rows, std::ostream& out) {
    out << "distribution,length,batch,alpha,rejection_freq\n";
    for (const auto& [cfg, res] : rows)
        out << to_string(cfg.distribution) << ',' << cfg.stream_length << ',' << cfg.batch_size << ','
            << format_double(cfg.alpha) << ',' << format_double(res.frequency()) << '\n';
}

void RegimeScenario::validate() const {
    if (n_streams < 1) throw ConfigError("n_streams", "must be >= 1");
    if (n_days < 1) throw ConfigError("n_days", "must be >= 1");
    if (slots_per_day < 1) throw ConfigError("slots_per_day", "must be >= 1");
    if (days_per_week < 1) throw ConfigError("days_per_week", "must be >= 1");
    if (noise_scale < 0.0) throw ConfigError("noise_scale", "must be >= 0");
    if (!(correlation >= 0.0 && correlation <= 1.0)) throw ConfigError("correlation", "must be in [0, 1]");
    if (!base_levels.empty() && base_levels.size() != n_streams)
        throw ConfigError("base_levels", "need one level per stream");
    for (double l : base_levels)
        if (!(l > 0.0)) throw ConfigError("base_levels", "levels must be > 0");
    for (const auto& s : shifts) {
        if (!(s.multiplier > 0.0)) throw ConfigError("shifts", "multipliers must be > 0");
        if (s.day < 0 || s.day >= n_days) throw ConfigError("shifts", "shift day out of range");
        if (s.stream >= n_streams) throw ConfigError("shifts", "shift stream out of range");
    }
}

RegimeScenario default_scenario(std::uint64_t seed) {
    RegimeScenario s;
    s.seed = seed;
    std::mt19937_64 rng(derive_seed(seed, 0xD5));
    std::uniform_int_distribution<long> day(40, 100);
    std::uniform_real_distribution<double> size(1.6, 2.5);
    std::bernoulli_distribution up(0.5);
    for (std::size_t i = 0; i < s.n_streams; ++i) {
        const double m = size(rng);
        s.shifts.push_back({day(rng), i, up(rng) ? m : 1.0 / m});
    }
    return s;
}

namespace {

struct Profile {
    double level = 1.0;
    std::vector<double> slot_shape;  // per slot of the day
    std::vector<double> day_factor;  // per weekday
};

std::vector<Profile> make_profiles(const RegimeScenario& sc) {
    std::vector<Profile> out(sc.n_streams);
    for (std::size_t i = 0; i < sc.n_streams; ++i) {
        std::mt19937_64 rng(derive_seed(sc.seed, 1000 + i));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        auto& p = out[i];
        p.level = sc.base_levels.empty() ? 10.0 + 30.0 * u(rng) : sc.base_levels[i];
        p.slot_shape.assign(static_cast<std::size_t>(sc.slots_per_day), 1.0);
        p.day_factor.assign(static_cast<std::size_t>(sc.days_per_week), 1.0);
        if (sc.flat_profile) continue;

        // Lunch and dinner peaks over a low base.
        const double lunch = 0.5 + 0.7 * u(rng);
        const double dinner = 0.5 + 0.7 * u(rng);
        for (long k = 0; k < sc.slots_per_day; ++k) {
            const double x = (static_cast<double>(k) + 0.5) / static_cast<double>(sc.slots_per_day);
            const double a = (x - 0.25) / 0.08;
            const double b = (x - 0.70) / 0.10;
            p.slot_shape[static_cast<std::size_t>(k)] = 0.4 + lunch * std::exp(-a * a) + dinner * std::exp(-b * b);
        }
        const double weekend = 0.1 + 0.3 * u(rng);
        for (long d = 0; d < sc.days_per_week; ++d) {
            double f = 1.0 + 0.2 * (u(rng) - 0.5);
            if (sc.days_per_week == 7 && d >= 5) f += weekend;
            p.day_factor[static_cast<std::size_t>(d)] = f;
        }
    }
    return out;
}

double level_multiplier(const RegimeScenario& sc, std::size_t stream, long day) {
    double m = 1.0;
    for (const auto& s : sc.shifts)
        if (s.stream == stream && day >= s.day) m *= s.multiplier;
    return m;
}

double expected_from(const RegimeScenario& sc, const Profile& p, std::size_t stream, long tick) {
    const long day = (tick - 1) / sc.slots_per_day;
    const long slot = (tick - 1) % sc.slots_per_day;
    return p.level * level_multiplier(sc, stream, day) * p.slot_shape[static_cast<std::size_t>(slot)] *
           p.day_factor[static_cast<std::size_t>(day % sc.days_per_week)];
}

}  // namespace

double expected_demand(const RegimeScenario& scenario, long tick, std::size_t stream) {
    scenario.validate();
    const auto profiles = make_profiles(scenario);
    return expected_from(scenario, profiles.at(stream), stream, tick);
}

StreamSet gen_regime_streams(const RegimeScenario& scenario) {
    scenario.validate();
    const auto profiles = make_profiles(scenario);
    const std::size_t D = scenario.n_streams;
    const long T = scenario.n_days * scenario.slots_per_day;

    RandomSource rng(derive_seed(scenario.seed, 7));
    const double common = std::sqrt(scenario.correlation);
    const double own = std::sqrt(1.0 - scenario.correlation);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(T) * D);
    for (long t = 1; t <= T; ++t) {
        const double z0 = rng.gaussian();
        for (std::size_t i = 0; i < D; ++i) {
            const double mean = expected_from(scenario, profiles[i], i, t);
            const double z = common * z0 + own * rng.gaussian();
            values.push_back(std::max(0.0, mean + scenario.noise_scale * mean * z));
        }
    }
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < D; ++i) ids.push_back("s" + std::to_string(i + 1));
    return StreamSet(std::move(ids), std::move(values), scenario.slots_per_day);
}

RegimeScenario scenario_from_keys(const std::map<std::string, std::string>& keys) {
    using kv::to_bool;
    using kv::to_double;
    using kv::to_long;
    static const char* known[] = {"n_streams", "n_days", "slots_per_day", "days_per_week", "noise_scale",
                                  "correlation", "flat_profile", "base_levels", "shifts", "seed", "default"};
    for (const auto& [k, v] : keys)
        if (std::find(std::begin(known), std::end(known), k) == std::end(known))
            throw ConfigError(k, "unknown scenario key");

    const auto get = [&](const char* k) -> const std::string* {
        auto it = keys.find(k);
        return it == keys.end() ? nullptr : &it->second;
    };
    std::uint64_t seed = 1;
    if (auto v = get("seed")) seed = static_cast<std::uint64_t>(to_long("seed", *v));

    RegimeScenario s;
    s.seed = seed;
    if (auto v = get("default"); v && to_bool("default", *v)) s = default_scenario(seed);
    if (auto v = get("n_streams")) s.n_streams = static_cast<std::size_t>(to_long("n_streams", *v));
    if (auto v = get("n_days")) s.n_days = to_long("n_days", *v);
    if (auto v = get("slots_per_day")) s.slots_per_day = to_long("slots_per_day", *v);
    if (auto v = get("days_per_week")) s.days_per_week = to_long("days_per_week", *v);
    if (auto v = get("noise_scale")) s.noise_scale = to_double("noise_scale", *v);
    if (auto v = get("correlation")) s.correlation = to_double("correlation", *v);
    if (auto v = get("flat_profile")) s.flat_profile = to_bool("flat_profile", *v);
    if (auto v = get("base_levels")) {
        s.base_levels.clear();
        for (auto item : split(*v, ','))
            if (!trim(item).empty()) s.base_levels.push_back(to_double("base_levels", item));
    }
    if (auto v = get("shifts")) {
        s.shifts.clear();
        for (auto item : split(*v, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            auto parts = split(item, ':');
            if (parts.size() != 3) throw ConfigError("shifts", "expected day:stream:multiplier");
            LevelShift shift;
            shift.day = to_long("shifts", parts[0]);
            shift.stream = static_cast<std::size_t>(to_long("shifts", parts[1]));
            shift.multiplier = to_double("shifts", parts[2]);
            s.shifts.push_back(shift);
        }
    }
    s.validate();
    return s;
}

}  // namespace fcmon
