#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fcmon/features.hpp"
#include "fcmon/seed.hpp"
#include "fcmon/tree.hpp"

namespace fcmon {

enum class ModelKind { Naive, Lasso, Forest, Boosting };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct ForestParams {
    std::size_t n_trees = 500;
    std::size_t mtry = 0;  // 0: floor(p/3), at least 1
    std::size_t min_node_size = 5;
    bool bootstrap = true;
};

struct BoostingParams {
    std::size_t n_rounds = 100;
    std::size_t max_depth = 6;
    double learning_rate = 0.3;
    double min_split_gain = 0.0;
    double colsample = 1.0;
    double min_child_weight = 1.0;
    double subsample = 1.0;
};

struct LassoParams {
    std::size_t n_lambda = 100;
    double lambda_min_ratio = 1e-3;
    double tol = 1e-10;
    std::size_t max_iter = 100000;
};

struct HyperParams {
    ForestParams forest;
    BoostingParams boosting;
    LassoParams lasso;
    long naive_lag = 420;
    unsigned threads = 1;  // forest trees trained in parallel; results do not depend on it
};

struct NaiveModel {
    long lag = 0;
    std::size_t column = 0;  // feature column holding the lagged own-stream value
};

struct LinearModel {
    double intercept = 0.0;
    std::vector<double> coef;  // one per feature, original scale
    double lambda = 0.0;
};

struct ForestModel {
    std::vector<RegressionTree> trees;
};

struct BoostingModel {
    double base = 0.0;  // initial prediction: mean target
    std::vector<RegressionTree> trees;  // leaf values already include the learning rate
};

/// A trained forecast function. Prediction is a pure function of the
/// feature vector.
struct ForecastModel {
    ModelKind kind = ModelKind::Naive;
    std::variant<NaiveModel, LinearModel, ForestModel, BoostingModel> params;
    long trained_at = 0;
    std::vector<std::string> feature_names;
};

/// Seasonal naive forecast: the target stream's value `lag` ticks back. The
/// lag must be available at forecast time (lag >= horizon) and must be one of
/// the design's lag columns for `stream_id`.
ForecastModel fit_naive(long lag, long horizon, const std::vector<std::string>& feature_names,
                        const std::string& stream_id);

ForecastModel fit_lasso(const DesignMatrix& data, const LassoParams& params);
ForecastModel fit_forest(const DesignMatrix& data, const ForestParams& params, std::uint64_t seed,
                         unsigned threads = 1);
ForecastModel fit_boosting(const DesignMatrix& data, const BoostingParams& params, std::uint64_t seed);

/// Throws ShapeError when the feature count does not match the model.
double predict(const ForecastModel& model, std::span<const double> features);

/// JSON dump of coefficients or trees for inspection.
std::string dump_model(const ForecastModel& model);

}  // namespace fcmon
