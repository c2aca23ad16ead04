#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <json.hpp>

#include "../support/lasso_check.hpp"
#include "fcmon/errors.hpp"
#include "fcmon/forecasters.hpp"
#include "fcmon/tree.hpp"

using namespace fcmon;

namespace {

DesignMatrix step_data() {
    // y jumps from 1 to 5 where x0 crosses 0.5; x1 is noise
    DesignMatrix dm;
    dm.column_names = {"x0", "x1"};
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u;
    for (int i = 0; i < 40; ++i) {
        const double x0 = i / 40.0;
        dm.x.push_back(x0);
        dm.x.push_back(u(rng));
        dm.y.push_back(x0 <= 0.5 ? 1.0 : 5.0);
        dm.ticks.push_back(i + 1);
    }
    return dm;
}

double rmse(const ForecastModel& m, const DesignMatrix& dm) {
    double s = 0.0;
    for (std::size_t i = 0; i < dm.n_rows(); ++i) {
        const double e = dm.y[i] - predict(m, dm.row(i));
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(dm.n_rows()));
}

}  // namespace

TEST_CASE("a single tree finds the step at the midpoint") {
    auto dm = step_data();
    TreeGrower grower(dm);
    std::vector<std::uint32_t> counts(dm.n_rows(), 1);
    std::vector<int> features{0, 1};
    TreeGrowParams params;
    params.max_depth = 1;
    std::mt19937_64 rng(1);
    auto tree = grower.grow(dm.y, counts, features, params, rng);
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == doctest::Approx((20.0 / 40 + 21.0 / 40) / 2));
    CHECK(tree.nodes[1].value == 1.0);
    CHECK(tree.nodes[2].value == 5.0);
    CHECK(tree.depth() == 1);
    CHECK(tree.n_leaves() == 2);
}

TEST_CASE("tied splits go to the lowest feature index") {
    DesignMatrix dm;
    dm.column_names = {"a", "b"};
    for (int i = 0; i < 10; ++i) {
        dm.x.push_back(i);
        dm.x.push_back(i);
        dm.y.push_back(i < 5 ? 0.0 : 1.0);
        dm.ticks.push_back(i + 1);
    }
    TreeGrower grower(dm);
    std::vector<std::uint32_t> counts(10, 1);
    std::vector<int> features{1, 0};
    TreeGrowParams params;
    params.max_depth = 1;
    std::mt19937_64 rng(1);
    auto tree = grower.grow(dm.y, counts, features, params, rng);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == 4.5);
}

TEST_CASE("binned and continuous columns give the same split") {
    // The same column once with few levels (histogram path) and once
    // perturbed into many levels (sorted path).
    DesignMatrix a, b;
    a.column_names = b.column_names = {"x"};
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (int i = 0; i < 200; ++i) {
        const double level = i % 7;
        a.x.push_back(level);
        b.x.push_back(level + 1e-9 * (i % 3));
        const double y = (level >= 4 ? 3.0 : 0.0) + 0.1 * z(rng);
        a.y.push_back(y);
        b.y.push_back(y);
        a.ticks.push_back(i);
        b.ticks.push_back(i);
    }
    TreeGrowParams params;
    params.max_depth = 1;
    std::vector<std::uint32_t> counts(200, 1);
    std::vector<int> features{0};
    std::mt19937_64 r1(1), r2(1);
    auto ta = TreeGrower(a).grow(a.y, counts, features, params, r1);
    auto tb = TreeGrower(b).grow(b.y, counts, features, params, r2);
    CHECK(ta.nodes[0].threshold == doctest::Approx(3.5));
    CHECK(tb.nodes[0].threshold == doctest::Approx(3.5).epsilon(1e-6));
}

TEST_CASE("forest predictions stay within the training target range") {
    auto dm = oracle::random_problem(5, 150, 6);
    ForestParams fp;
    fp.n_trees = 30;
    auto m = fit_forest(dm, fp, 42);
    const auto [lo, hi] = std::minmax_element(dm.y.begin(), dm.y.end());
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z(0.0, 10.0);
    for (int k = 0; k < 200; ++k) {
        std::vector<double> x(6);
        for (auto& v : x) v = z(rng);
        const double f = predict(m, x);
        CHECK(f >= *lo);
        CHECK(f <= *hi);
    }
}

TEST_CASE("forest is deterministic in the seed and independent of threads") {
    auto dm = oracle::random_problem(6, 100, 5);
    ForestParams fp;
    fp.n_trees = 12;
    auto a = fit_forest(dm, fp, 7, 1);
    auto b = fit_forest(dm, fp, 7, 3);
    auto c = fit_forest(dm, fp, 8, 1);
    CHECK(dump_model(a) == dump_model(b));
    CHECK(dump_model(a) != dump_model(c));
}

TEST_CASE("boosting training error decreases round by round") {
    auto dm = oracle::random_problem(8, 200, 6);
    BoostingParams bp;
    double prev = 1e300;
    for (std::size_t rounds : {1u, 2u, 5u, 10u, 20u}) {
        bp.n_rounds = rounds;
        const double e = rmse(fit_boosting(dm, bp, 1), dm);
        CHECK(e <= prev);
        prev = e;
    }
}

TEST_CASE("boosting with zero rounds predicts the mean") {
    auto dm = step_data();
    BoostingParams bp;
    bp.n_rounds = 0;
    auto m = fit_boosting(dm, bp, 1);
    const double mean = std::accumulate(dm.y.begin(), dm.y.end(), 0.0) / 40.0;
    CHECK(predict(m, dm.row(0)) == doctest::Approx(mean));
}

TEST_CASE("boosting leaves carry the learning rate") {
    auto dm = step_data();
    BoostingParams bp;
    bp.n_rounds = 1;
    bp.max_depth = 1;
    bp.learning_rate = 0.5;
    auto m = fit_boosting(dm, bp, 1);
    // 21 rows at 1 and 19 at 5
    const auto& b = std::get<BoostingModel>(m.params);
    CHECK(b.base == doctest::Approx(2.9));
    CHECK(predict(m, dm.row(0)) == doctest::Approx(b.base + 0.5 * (1.0 - b.base)));
}

TEST_CASE("naive forecast copies the lagged own value") {
    std::vector<std::string> names{"lag60_a", "lag60_b", "lag420_a", "lag420_b", "trend"};
    auto m = fit_naive(420, 60, names, "b");
    std::vector<double> x{1, 2, 3, 4, 5};
    CHECK(predict(m, x) == 4.0);
    CHECK_THROWS_AS(fit_naive(30, 60, names, "b"), InvalidLag);
    CHECK_THROWS_AS(fit_naive(120, 60, names, "b"), InvalidLag);
}

TEST_CASE("predict checks the feature count") {
    auto dm = step_data();
    auto m = fit_lasso(dm, LassoParams{});
    std::vector<double> x{1.0};
    CHECK_THROWS_AS(predict(m, x), ShapeError);
}

TEST_CASE("model dump is valid JSON") {
    auto dm = step_data();
    ForestParams fp;
    fp.n_trees = 2;
    auto j = nlohmann::json::parse(dump_model(fit_forest(dm, fp, 1)));
    CHECK(j["kind"] == "forest");
    CHECK(j["trees"].size() == 2);
}

TEST_CASE("model kinds parse by name") {
    CHECK(parse_model_kind("boosting") == ModelKind::Boosting);
    CHECK(std::string(to_string(ModelKind::Lasso)) == "lasso");
    CHECK_THROWS_AS(parse_model_kind("svm"), ConfigError);
}
