#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "fcmon/errors.hpp"
#include "fcmon/pelt.hpp"
#include "fcmon/stats.hpp"

using namespace fcmon;

namespace {

std::vector<double> random_history(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> z;
    std::uniform_int_distribution<int> regimes(1, 3);
    const int k = regimes(rng);
    std::vector<double> x;
    for (int r = 0; r < k; ++r) {
        const double mu = 5.0 * z(rng);
        const double sd = std::exp(z(rng));
        const std::size_t len = r + 1 == k ? n - x.size() : n / static_cast<std::size_t>(k);
        for (std::size_t i = 0; i < len; ++i) x.push_back(mu + sd * z(rng));
    }
    return x;
}

}  // namespace

TEST_CASE("two clear regimes give one changepoint at the boundary") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z(0.0, 0.01);
    std::vector<double> x;
    for (int i = 0; i < 20; ++i) x.push_back(1.0 + z(rng));
    for (int i = 0; i < 20; ++i) x.push_back(10.0 + z(rng));
    auto seg = pelt(x, 3.0 * std::log(40.0));
    REQUIRE(seg.changepoints.size() == 1);
    CHECK(seg.changepoints[0] == 20);
}

TEST_CASE("constant history has no changepoints") {
    std::vector<double> x(30, 2.0);
    CHECK(pelt(x, 3.0 * std::log(30.0)).changepoints.empty());
}

TEST_CASE("Pelt equals exhaustive search on small histories") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> len(4, 16);
    for (int rep = 0; rep < 60; ++rep) {
        auto x = random_history(rng, len(rng));
        for (std::size_t m : {2u, 3u}) {
            const double pen = 3.0 * std::log(static_cast<double>(x.size()));
            auto seg = pelt(x, pen, m);
            auto best = oracle::exhaustive_partition(x, pen, m, gaussian_segment_cost);
            CHECK(seg.cost == best.cost);
            CHECK(seg.changepoints == best.changepoints);
        }
    }
}

TEST_CASE("larger penalty never adds changepoints") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 20; ++rep) {
        auto x = random_history(rng, 40);
        std::size_t prev = x.size();
        for (double pen : {0.5, 2.0, 5.0, 11.0, 25.0, 60.0}) {
            auto k = pelt(x, pen).changepoints.size();
            CHECK(k <= prev);
            prev = k;
        }
    }
}

TEST_CASE("segments respect the minimum length") {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        auto x = random_history(rng, 50);
        auto seg = pelt(x, 1.0, 4);
        std::size_t prev = 0;
        for (auto cp : seg.changepoints) {
            CHECK(cp - prev >= 4);
            prev = cp;
        }
        CHECK(x.size() - prev >= 4);
    }
}

TEST_CASE("argument checks") {
    std::vector<double> x{1, 2, 3};
    CHECK_THROWS_AS(pelt(x, 1.0, 1), InvalidArgument);
    CHECK_THROWS_AS(pelt(x, 1.0, 4), InsufficientSample);
}
