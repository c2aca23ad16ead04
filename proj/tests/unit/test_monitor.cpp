#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "fcmon/errors.hpp"
#include "fcmon/monitor.hpp"

using namespace fcmon;

namespace {

std::vector<double> draws(std::mt19937_64& rng, std::size_t n, double mu = 1.0, double sd = 0.3) {
    std::normal_distribution<double> z(mu, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = z(rng);
    return v;
}

}  // namespace

TEST_CASE("warm-up seeds the reference without a test") {
    MonitorState m(MonitorPolicy::mean_test(0.05));
    CHECK_FALSE(m.warm());
    std::vector<double> first(60, 1.0);
    auto d = m.warmup(first, 1);
    CHECK(d.warmup);
    CHECK_FALSE(d.retrain);
    CHECK_FALSE(d.test.has_value());
    CHECK(m.reference().losses().size() == 60);
    CHECK(m.r_history() == std::vector<int>{0});
    CHECK_THROWS_AS(m.warmup(first, 2), AlreadyWarm);
}

TEST_CASE("warm-up rejects an empty batch") {
    MonitorState m(MonitorPolicy::mean_test(0.05));
    CHECK_THROWS_AS(m.warmup(std::vector<double>{}, 1), InvalidArgument);
}

TEST_CASE("testing before warm-up is an error") {
    MonitorState m(MonitorPolicy::mean_test(0.05));
    CHECK_THROWS_AS(m.mean_test_step(std::vector<double>{1.0, 2.0}, 1), NotWarmedUp);
}

TEST_CASE("accepted batches join the reference; its mean is the pooled mean") {
    std::mt19937_64 rng(1);
    MonitorState m(MonitorPolicy::mean_test(1e-9));
    std::vector<double> all;
    auto first = draws(rng, 50);
    m.warmup(first, 1);
    all = first;
    for (long k = 2; k <= 6; ++k) {
        auto b = draws(rng, 50);
        auto d = m.mean_test_step(b, k);
        REQUIRE_FALSE(d.retrain);
        all.insert(all.end(), b.begin(), b.end());
        CHECK(m.reference().losses().size() == all.size());
        CHECK(m.reference().summary().mean == doctest::Approx(oracle::mean(all)).epsilon(1e-13));
    }
}

TEST_CASE("a large shift rejects and resets the reference") {
    std::mt19937_64 rng(2);
    auto first = draws(rng, 60);
    std::vector<double> shifted = first;
    for (auto& v : shifted) v += 1000.0;

    SUBCASE("rejecting batch becomes the reference") {
        MonitorState m(MonitorPolicy::mean_test(0.05));
        m.warmup(first, 1);
        auto d = m.mean_test_step(shifted, 2);
        CHECK(d.retrain);
        CHECK(d.test->reject);
        CHECK(m.reference().losses() == shifted);
        CHECK(m.reference().established_at() == 2);
        CHECK(m.warm());
        CHECK(m.last_retrain() == 2);
    }
    SUBCASE("next batch re-seeds the reference") {
        auto policy = MonitorPolicy::mean_test(0.05);
        policy.reset = ResetMode::NextBatch;
        MonitorState m(policy);
        m.warmup(first, 1);
        CHECK(m.step(shifted, 2).retrain);
        CHECK_FALSE(m.warm());
        auto d = m.step(shifted, 3);
        CHECK(d.warmup);
        CHECK(m.r_history() == std::vector<int>{0, 1, 0});
    }
}

TEST_CASE("reference length cap keeps the most recent losses") {
    auto policy = MonitorPolicy::mean_test(1e-12);
    policy.reference_max_len = 5;
    MonitorState m(policy);
    m.warmup(std::vector<double>{1, 2, 3, 4}, 1);
    m.mean_test_step(std::vector<double>{2, 3, 4}, 2);
    CHECK(m.reference().losses() == std::vector<double>{3, 4, 2, 3, 4});
    CHECK(m.reference().summary().mean == doctest::Approx(3.2));
}

TEST_CASE("mean-test decisions are scale invariant") {
    std::mt19937_64 rng(4);
    for (double c : {1e-3, 7.0, 1e4}) {
        MonitorState a(MonitorPolicy::mean_test(0.05)), b(MonitorPolicy::mean_test(0.05));
        std::mt19937_64 local(rng());
        for (long k = 1; k <= 30; ++k) {
            auto x = draws(local, 20, k > 15 ? 1.3 : 1.0);
            auto y = x;
            for (auto& v : y) v *= c;
            CHECK(a.step(x, k).retrain == b.step(y, k).retrain);
        }
        CHECK(a.r_history() == b.r_history());
    }
}

TEST_CASE("scheduled policies") {
    SUBCASE("every batch") {
        MonitorState m(MonitorPolicy::every(1));
        std::vector<double> l{1.0, 2.0};
        m.step(l, 1);
        for (long k = 2; k <= 6; ++k) CHECK(m.step(l, k).retrain);
        CHECK(m.r_history() == std::vector<int>{0, 1, 1, 1, 1, 1});
    }
    SUBCASE("every third batch counts from the initial fit") {
        MonitorState m(MonitorPolicy::every(3));
        std::vector<double> l{1.0, 2.0};
        std::vector<int> r;
        for (long k = 1; k <= 9; ++k) r.push_back(m.step(l, k).retrain);
        CHECK(r == std::vector<int>{0, 0, 1, 0, 0, 1, 0, 0, 1});
    }
    SUBCASE("never") {
        MonitorState m(MonitorPolicy::never());
        std::vector<double> l{1.0, 2.0};
        for (long k = 1; k <= 20; ++k) CHECK_FALSE(m.step(l, k).retrain);
    }
}

TEST_CASE("Pelt monitor flags a level change and restarts after it") {
    std::mt19937_64 rng(6);
    MonitorState m(MonitorPolicy::pelt());
    const long m_len = static_cast<long>(MonitorPolicy::pelt().min_seg_len);
    long flagged = -1;
    for (long k = 1; k <= 40; ++k) {
        auto b = draws(rng, 60, k <= 20 ? 1.0 : 10.0, 0.05);
        auto d = m.step(b, k);
        if (!d.retrain) continue;
        REQUIRE(d.changepoints.size() >= 1);
        const long cp = d.changepoints.back();
        // A single post-change batch already forces a break, placed as late
        // as the minimum segment length allows.
        CHECK(cp >= 21 - m_len + 1);
        CHECK(cp <= k - m_len + 1);
        CHECK(*d.detection_delay == k - cp);
        CHECK(m.loss_history().size() == static_cast<std::size_t>(k - cp + 1));
        if (flagged < 0) flagged = k;
    }
    CHECK(flagged >= 21);
    CHECK(flagged <= 21 + 2 * m_len);
}

TEST_CASE("Pelt monitor stays quiet on a constant loss") {
    MonitorState m(MonitorPolicy::pelt());
    std::vector<double> l(10, 0.5);
    for (long k = 1; k <= 30; ++k) CHECK_FALSE(m.step(l, k).retrain);
}

TEST_CASE("full-history Pelt retriggers only on later changepoints") {
    auto policy = MonitorPolicy::pelt();
    policy.pelt_history = PeltHistory::Full;
    MonitorState m(policy);
    std::mt19937_64 rng(7);
    int retrains = 0;
    long last = 0;
    for (long k = 1; k <= 40; ++k) {
        auto b = draws(rng, 60, k <= 20 ? 1.0 : 10.0, 0.05);
        auto d = m.step(b, k);
        if (!d.retrain) continue;
        ++retrains;
        CHECK(d.changepoints.back() > last);  // only a later changepoint retriggers
        last = d.changepoints.back();
        CHECK(last >= 21 - static_cast<long>(policy.min_seg_len) + 1);
    }
    CHECK(retrains >= 1);
    CHECK(m.r_history()[20] == 1);
    CHECK(m.loss_history().size() == 40);
}

TEST_CASE("policy names") {
    CHECK(parse_policy_kind("pelt") == PolicyKind::Pelt);
    CHECK(parse_policy_kind("every_k") == PolicyKind::EveryKBatches);
    CHECK_THROWS_AS(parse_policy_kind("sometimes"), ConfigError);
    CHECK(MonitorPolicy::mean_test(0.01).label() == "mean_test(alpha=0.01)");
}
