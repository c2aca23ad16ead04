#pragma once

#include <vector>

#include "fcmon/features.hpp"
#include "fcmon/forecasters.hpp"

namespace fcmon {

/// Solutions of the lasso
///
///     (1/2n) * sum_t (y_t - b0 - x_t' b)^2 + lambda * ||b||_1
///
/// on standardized predictors (mean 0, population variance 1), over a
/// geometric grid from lambda_max down to lambda_max * lambda_min_ratio.
/// Coefficients are reported on the original predictor scale. Columns with
/// zero variance are dropped before standardization and keep a zero slope.
struct LassoPath {
    std::vector<double> lambdas;
    std::vector<LinearModel> fits;
    std::vector<double> rss;
    std::vector<double> bic;
    std::vector<std::size_t> nonzero;
    std::size_t selected = 0;  // index minimizing BIC (first on ties)
};

LassoPath lasso_path(const DesignMatrix& data, const LassoParams& params);

/// Single fit at a given lambda (lambda = 0 is least squares).
LinearModel lasso_at(const DesignMatrix& data, double lambda, const LassoParams& params);

/// Smallest lambda at which all slopes are zero.
double lasso_lambda_max(const DesignMatrix& data);

}  // namespace fcmon
