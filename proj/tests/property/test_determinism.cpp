#include <doctest.h>

#include <sstream>

#include "fcmon/pipeline.hpp"
#include "fcmon/simulate.hpp"

using namespace fcmon;

namespace {

std::string outputs(const RunLog& log) {
    std::ostringstream out;
    write_forecasts_csv(log, out);
    write_decisions_csv(log, out);
    auto r = build_report(log);
    for (auto& s : r.streams) s.retrain_seconds = 0.0;  // wall time is not reproducible
    r.avg_retrain_seconds = 0.0;
    write_report_csv(r, out);
    return out.str();
}

RunConfig config(const char* forecaster, const char* policy, std::uint64_t seed) {
    return config_from_keys({{"scenario.n_streams", "4"},
                             {"scenario.n_days", "50"},
                             {"scenario.slots_per_day", "20"},
                             {"scenario.shifts", "25:0:2,30:3:0.6"},
                             {"lags", "20,140"},
                             {"window_days", "14"},
                             {"forecaster", forecaster},
                             {"forest.n_trees", "15"},
                             {"boosting.n_rounds", "15"},
                             {"lasso.n_lambda", "25"},
                             {"naive.lag", "140"},
                             {"policy", policy},
                             {"seed", std::to_string(seed)}});
}

}  // namespace

TEST_CASE("(config, seed) determines the run log exactly, for any thread count") {
    for (const char* forecaster : {"forest", "boosting", "lasso", "naive"}) {
        for (const char* policy : {"mean_test", "pelt"}) {
            CAPTURE(forecaster);
            CAPTURE(policy);
            auto c = config(forecaster, policy, 5);
            const auto first = outputs(run(c));
            CHECK(outputs(run(c)) == first);
            c.threads = 3;
            CHECK(outputs(run(c)) == first);
        }
    }
    CHECK(outputs(run(config("forest", "mean_test", 5))) != outputs(run(config("forest", "mean_test", 6))));
}

TEST_CASE("forecasts within a batch come from one model, ids advance only on retrain") {
    const auto log = run(config("boosting", "mean_test", 2));
    const std::size_t D = log.stream_ids.size();
    std::vector<std::uint64_t> id(D, 0);
    for (const auto& rec : log.records) {
        CHECK(rec.model_id == id[rec.stream]);
        CHECK(rec.forecasts.size() == rec.ticks.size());
        if (rec.decision.retrain) ++id[rec.stream];
    }
}

TEST_CASE("null study is a pure function of its config") {
    NullStudyConfig cfg;
    cfg.stream_length = 3000;
    cfg.n_replications = 40;
    const auto a = run_null_study(cfg, 1);
    const auto b = run_null_study(cfg, 3);
    CHECK(a.rejections == b.rejections);
    CHECK(a.tests == b.tests);
}

TEST_CASE("rejections grow with alpha replication by replication") {
    for (auto dist : {NullDistribution::Gaussian, NullDistribution::ChiSquare5}) {
        for (std::uint64_t rep = 0; rep < 30; ++rep) {
            NullStudyConfig lo;
            lo.distribution = dist;
            lo.stream_length = 2000;
            lo.n_replications = 1;
            lo.seed = 100 + rep;
            lo.alpha = 0.01;
            auto hi = lo;
            hi.alpha = 0.05;
            CHECK(run_null_study(lo).rejections <= run_null_study(hi).rejections);
        }
    }
}
