#include "fcmon/forecasters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "fcmon/errors.hpp"
#include "fcmon/lasso.hpp"
#include "fcmon/parallel.hpp"

namespace fcmon {

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Naive: return "naive";
        case ModelKind::Lasso: return "lasso";
        case ModelKind::Forest: return "forest";
        case ModelKind::Boosting: return "boosting";
    }
    return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "naive") return ModelKind::Naive;
    if (name == "lasso") return ModelKind::Lasso;
    if (name == "forest") return ModelKind::Forest;
    if (name == "boosting") return ModelKind::Boosting;
    throw ConfigError("forecaster", "unknown forecaster '" + name + "'");
}

ForecastModel fit_naive(long lag, long horizon, const std::vector<std::string>& feature_names,
                        const std::string& stream_id) {
    if (lag < horizon)
        throw InvalidLag("naive lag " + std::to_string(lag) + " is shorter than the horizon " +
                         std::to_string(horizon));
    const auto name = "lag" + std::to_string(lag) + "_" + stream_id;
    auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) throw InvalidLag("no feature column '" + name + "'");
    ForecastModel m;
    m.kind = ModelKind::Naive;
    m.params = NaiveModel{lag, static_cast<std::size_t>(it - feature_names.begin())};
    m.feature_names = feature_names;
    return m;
}

ForecastModel fit_lasso(const DesignMatrix& data, const LassoParams& params) {
    auto path = lasso_path(data, params);
    ForecastModel m;
    m.kind = ModelKind::Lasso;
    m.params = std::move(path.fits[path.selected]);
    m.feature_names = data.column_names;
    return m;
}

ForecastModel fit_forest(const DesignMatrix& data, const ForestParams& params, std::uint64_t seed,
                         unsigned threads) {
    const std::size_t n = data.n_rows();
    const std::size_t p = data.n_cols();
    if (params.min_node_size < 1) throw InvalidArgument("min_node_size must be >= 1");
    if (n < params.min_node_size || n == 0) throw InsufficientData("forest needs at least min_node_size rows");
    if (p == 0) throw InsufficientData("forest needs at least one feature");

    const std::size_t mtry = params.mtry == 0 ? std::max<std::size_t>(1, p / 3) : std::min(params.mtry, p);
    TreeGrowParams grow;
    grow.min_leaf = params.min_node_size;
    grow.min_split = 2 * params.min_node_size;
    grow.features_per_split = mtry;

    const TreeGrower grower(data);
    std::vector<int> features(p);
    std::iota(features.begin(), features.end(), 0);

    ForestModel forest;
    forest.trees.resize(params.n_trees);
    parallel_for(params.n_trees, threads, [&](std::size_t t) {
        std::mt19937_64 rng(derive_seed(seed, t));
        std::vector<std::uint32_t> counts(n, params.bootstrap ? 0u : 1u);
        if (params.bootstrap) {
            std::uniform_int_distribution<std::size_t> draw(0, n - 1);
            for (std::size_t i = 0; i < n; ++i) ++counts[draw(rng)];
        }
        forest.trees[t] = grower.grow(data.y, counts, features, grow, rng);
    });

    ForecastModel m;
    m.kind = ModelKind::Forest;
    m.params = std::move(forest);
    m.feature_names = data.column_names;
    return m;
}

ForecastModel fit_boosting(const DesignMatrix& data, const BoostingParams& params, std::uint64_t seed) {
    const std::size_t n = data.n_rows();
    const std::size_t p = data.n_cols();
    if (n < 2) throw InsufficientData("boosting needs at least 2 rows");
    if (p == 0) throw InsufficientData("boosting needs at least one feature");
    if (!(params.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
    if (!(params.colsample > 0.0 && params.colsample <= 1.0)) throw InvalidArgument("colsample must be in (0, 1]");
    if (!(params.subsample > 0.0 && params.subsample <= 1.0)) throw InvalidArgument("subsample must be in (0, 1]");

    BoostingModel model;
    model.base = std::accumulate(data.y.begin(), data.y.end(), 0.0) / static_cast<double>(n);

    TreeGrowParams grow;
    grow.max_depth = params.max_depth;
    grow.min_leaf = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(params.min_child_weight)));
    grow.min_split = 2 * grow.min_leaf;
    grow.min_gain = params.min_split_gain;
    grow.leaf_scale = params.learning_rate;

    const TreeGrower grower(data);
    std::mt19937_64 rng(seed);
    std::vector<double> fitted(n, model.base);
    std::vector<double> residual(n);
    std::vector<std::uint32_t> counts(n, 1);
    std::vector<int> all_features(p);
    std::iota(all_features.begin(), all_features.end(), 0);
    const auto n_cols =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.colsample * static_cast<double>(p))));
    const auto n_sub =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(params.subsample * static_cast<double>(n))));

    for (std::size_t round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = data.y[i] - fitted[i];

        std::vector<int> features = all_features;
        if (n_cols < p) {
            std::shuffle(features.begin(), features.end(), rng);
            features.resize(n_cols);
        }
        if (n_sub < n) {
            std::vector<std::size_t> rows(n);
            std::iota(rows.begin(), rows.end(), std::size_t{0});
            std::shuffle(rows.begin(), rows.end(), rng);
            std::fill(counts.begin(), counts.end(), 0u);
            for (std::size_t k = 0; k < n_sub; ++k) counts[rows[k]] = 1;
        }

        auto tree = grower.grow(residual, counts, features, grow, rng);
        for (std::size_t i = 0; i < n; ++i) fitted[i] += tree.predict(data.row(i));
        model.trees.push_back(std::move(tree));
    }

    ForecastModel m;
    m.kind = ModelKind::Boosting;
    m.params = std::move(model);
    m.feature_names = data.column_names;
    return m;
}

double predict(const ForecastModel& model, std::span<const double> features) {
    if (features.size() != model.feature_names.size())
        throw ShapeError("expected " + std::to_string(model.feature_names.size()) + " features, got " +
                         std::to_string(features.size()));
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, NaiveModel>) {
                return features[p.column];
            } else if constexpr (std::is_same_v<T, LinearModel>) {
                double s = p.intercept;
                for (std::size_t j = 0; j < p.coef.size(); ++j) s += p.coef[j] * features[j];
                return s;
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                if (p.trees.empty()) throw InvalidArgument("forest has no trees");
                double s = 0.0;
                for (const auto& t : p.trees) s += t.predict(features);
                return s / static_cast<double>(p.trees.size());
            } else {
                double s = p.base;
                for (const auto& t : p.trees) s += t.predict(features);
                return s;
            }
        },
        model.params);
}

namespace {

nlohmann::json tree_json(const RegressionTree& tree) {
    auto nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
        if (n.is_leaf())
            nodes.push_back({{"leaf", n.value}, {"n", n.n_samples}});
        else
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"n", n.n_samples}});
    }
    return nodes;
}

}  // namespace

std::string dump_model(const ForecastModel& model) {
    nlohmann::json j;
    j["kind"] = to_string(model.kind);
    j["trained_at"] = model.trained_at;
    j["features"] = model.feature_names;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, NaiveModel>) {
                j["lag"] = p.lag;
                j["column"] = p.column;
            } else if constexpr (std::is_same_v<T, LinearModel>) {
                j["intercept"] = p.intercept;
                j["coef"] = p.coef;
                j["lambda"] = p.lambda;
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                auto trees = nlohmann::json::array();
                for (const auto& t : p.trees) trees.push_back(tree_json(t));
                j["trees"] = std::move(trees);
            } else {
                j["base"] = p.base;
                auto trees = nlohmann::json::array();
                for (const auto& t : p.trees) trees.push_back(tree_json(t));
                j["trees"] = std::move(trees);
            }
        },
        model.params);
    return j.dump(2);
}

}  // namespace fcmon
