#include <doctest.h>

#include <sstream>

#include "fcmon/errors.hpp"
#include "fcmon/simulate.hpp"

using namespace fcmon;

TEST_CASE("chi-square(5) draws have mean 5 and variance 10") {
    RandomSource rng(1);
    double s = 0.0, ss = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = rng.chi_square5();
        s += v;
        ss += v * v;
    }
    const double mean = s / n;
    CHECK(mean == doctest::Approx(5.0).epsilon(0.01));
    CHECK(ss / n - mean * mean == doctest::Approx(10.0).epsilon(0.03));
}

TEST_CASE("null study is seed-deterministic and thread-independent") {
    NullStudyConfig cfg;
    cfg.stream_length = 2000;
    cfg.n_replications = 50;
    auto a = run_null_study(cfg, 1);
    auto b = run_null_study(cfg, 4);
    CHECK(a.rejections == b.rejections);
    CHECK(a.tests == 50u * 39u);
    cfg.seed = 2;
    CHECK(run_null_study(cfg, 1).rejections != a.rejections);
}

TEST_CASE("null study config checks") {
    NullStudyConfig cfg;
    cfg.batch_size = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.stream_length = 60;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(parse_null_distribution("cauchy"), ConfigError);
}

TEST_CASE("null study CSV row") {
    NullStudyConfig cfg;
    NullStudyResult r{7, 100};
    std::ostringstream out;
    write_null_study_csv({{cfg, r}}, out);
    CHECK(out.str() == "distribution,length,batch,alpha,rejection_freq\ngaussian,10000,50,0.05,0.07\n");
}

TEST_CASE("regime scenario: shape, determinism, clipping") {
    auto sc = default_scenario(3);
    auto a = gen_regime_streams(sc);
    auto b = gen_regime_streams(sc);
    CHECK(a == b);
    CHECK(a.n_streams() == 4);
    CHECK(a.n_ticks() == 120 * 60);
    CHECK(a.stream_ids()[3] == "s4");
    for (double v : a.raw()) CHECK(v >= 0.0);
    CHECK(sc.shifts.size() == 4);
    for (const auto& s : sc.shifts) {
        CHECK(s.day >= 40);
        CHECK(s.day <= 100);
        const double m = s.multiplier >= 1.0 ? s.multiplier : 1.0 / s.multiplier;
        CHECK(m >= 1.6);
        CHECK(m <= 2.5);
    }
    CHECK_FALSE(gen_regime_streams(default_scenario(4)) == a);
}

TEST_CASE("level shifts scale expected demand from their day on") {
    RegimeScenario sc;
    sc.n_streams = 2;
    sc.n_days = 20;
    sc.shifts = {{10, 1, 2.0}};
    const long spd = sc.slots_per_day;
    // same weekday and slot, one week apart, straddling the shift
    const long t_before = 5 * spd + 17;
    const long t_after = 12 * spd + 17;
    CHECK(expected_demand(sc, t_after, 1) == doctest::Approx(2.0 * expected_demand(sc, t_before, 1)));
    CHECK(expected_demand(sc, t_after, 0) == doctest::Approx(expected_demand(sc, t_before, 0)));
}

TEST_CASE("noise-free flat scenario is constant per stream") {
    RegimeScenario sc;
    sc.n_streams = 2;
    sc.n_days = 3;
    sc.noise_scale = 0.0;
    sc.flat_profile = true;
    sc.base_levels = {5.0, 8.0};
    auto s = gen_regime_streams(sc);
    for (long t = 1; t <= s.n_ticks(); ++t) {
        CHECK(s.at(t, 0) == 5.0);
        CHECK(s.at(t, 1) == 8.0);
    }
}

TEST_CASE("scenario keys") {
    auto sc = scenario_from_keys({{"n_streams", "2"}, {"n_days", "30"}, {"shifts", "12:1:1.5, 20:0:0.5"},
                                  {"base_levels", "3,4"}, {"seed", "5"}});
    CHECK(sc.n_streams == 2);
    CHECK(sc.shifts.size() == 2);
    CHECK(sc.shifts[0].day == 12);
    CHECK(sc.shifts[1].multiplier == 0.5);
    CHECK(sc.seed == 5);
    auto d = scenario_from_keys({{"default", "true"}, {"seed", "7"}});
    CHECK(d.shifts.size() == default_scenario(7).shifts.size());
    CHECK(d.shifts[0].day == default_scenario(7).shifts[0].day);
    CHECK_THROWS_AS(scenario_from_keys({{"n_stream", "2"}}), ConfigError);
    CHECK_THROWS_AS(scenario_from_keys({{"shifts", "12:5:1.5"}}), ConfigError);
    CHECK_THROWS_AS(scenario_from_keys({{"noise_scale", "abc"}}), ConfigError);
}
