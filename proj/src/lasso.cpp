#include "fcmon/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "fcmon/errors.hpp"
#include "fcmon/stats.hpp"

namespace fcmon {

namespace {

struct Standardized {
    std::size_t n = 0;
    std::size_t p = 0;                     // original column count
    std::vector<std::size_t> kept;         // original index of each kept column
    std::vector<double> center;
    std::vector<double> scale;
    std::vector<std::vector<double>> cols; // standardized kept columns
    double y_mean = 0.0;
    std::vector<double> y_centered;
};

Standardized standardize(const DesignMatrix& data) {
    Standardized s;
    s.n = data.n_rows();
    s.p = data.n_cols();
    const double nn = static_cast<double>(s.n);
    std::vector<double> col(s.n);
    for (std::size_t j = 0; j < s.p; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) {
            col[i] = data.at(i, j);
            mean += col[i];
        }
        mean /= nn;
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / nn);
        if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) continue;
        for (double& v : col) v = (v - mean) / sd;
        s.kept.push_back(j);
        s.center.push_back(mean);
        s.scale.push_back(sd);
        s.cols.push_back(col);
    }
    double ym = 0.0;
    for (double y : data.y) ym += y;
    s.y_mean = ym / nn;
    s.y_centered.resize(s.n);
    for (std::size_t i = 0; i < s.n; ++i) s.y_centered[i] = data.y[i] - s.y_mean;
    return s;
}

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void recompute_residual(const Standardized& s, const std::vector<double>& beta, std::vector<double>& r) {
    r = s.y_centered;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        if (beta[j] == 0.0) continue;
        const auto& c = s.cols[j];
        for (std::size_t i = 0; i < s.n; ++i) r[i] -= c[i] * beta[j];
    }
}

// Cyclic coordinate descent from the given warm start; `r` must hold the
// matching residual and is kept in sync.
void coordinate_descent(const Standardized& s, double lambda, const LassoParams& params, std::vector<double>& beta,
                        std::vector<double>& r) {
    const double nn = static_cast<double>(s.n);
    for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
        bool converged = true;
        for (std::size_t j = 0; j < beta.size(); ++j) {
            const auto& c = s.cols[j];
            const double old = beta[j];
            const double next = soft_threshold(dot(c, r) / nn + old, lambda);
            const double delta = next - old;
            if (delta == 0.0) continue;
            for (std::size_t i = 0; i < s.n; ++i) r[i] -= c[i] * delta;
            beta[j] = next;
            if (std::fabs(delta) >= params.tol * (1.0 + std::fabs(next))) converged = false;
        }
        if (converged) break;
        // Refresh periodically so accumulated rounding in r stays negligible.
        if (iter % 64 == 63) recompute_residual(s, beta, r);
    }
    recompute_residual(s, beta, r);
}

LinearModel destandardize(const Standardized& s, const std::vector<double>& beta, double lambda) {
    LinearModel m;
    m.lambda = lambda;
    m.coef.assign(s.p, 0.0);
    double shift = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        const double c = beta[j] / s.scale[j];
        m.coef[s.kept[j]] = c;
        shift += c * s.center[j];
    }
    m.intercept = s.y_mean - shift;
    return m;
}

double lambda_max_of(const Standardized& s) {
    double best = 0.0;
    const double nn = static_cast<double>(s.n);
    for (const auto& c : s.cols) best = std::max(best, std::fabs(dot(c, s.y_centered)) / nn);
    return best;
}

void check_data(const DesignMatrix& data) {
    if (data.n_rows() < 2) throw InsufficientData("lasso needs at least 2 rows");
    if (data.x.size() != data.n_rows() * data.n_cols()) throw ShapeError("design matrix has inconsistent shape");
}

}  // namespace

double lasso_lambda_max(const DesignMatrix& data) {
    check_data(data);
    return lambda_max_of(standardize(data));
}

LinearModel lasso_at(const DesignMatrix& data, double lambda, const LassoParams& params) {
    check_data(data);
    if (lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
    const auto s = standardize(data);
    std::vector<double> beta(s.cols.size(), 0.0);
    std::vector<double> r = s.y_centered;
    coordinate_descent(s, lambda, params, beta, r);
    return destandardize(s, beta, lambda);
}

LassoPath lasso_path(const DesignMatrix& data, const LassoParams& params) {
    check_data(data);
    if (params.n_lambda < 1) throw InvalidArgument("n_lambda must be >= 1");
    if (!(params.lambda_min_ratio > 0.0 && params.lambda_min_ratio < 1.0))
        throw InvalidArgument("lambda_min_ratio must be in (0, 1)");

    const auto s = standardize(data);
    const double lmax = lambda_max_of(s);

    LassoPath path;
    std::vector<double> beta(s.cols.size(), 0.0);
    std::vector<double> r = s.y_centered;
    const std::size_t grid = lmax > 0.0 ? params.n_lambda : 1;
    for (std::size_t k = 0; k < grid; ++k) {
        const double frac = grid == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(grid - 1);
        const double lambda = lmax * std::pow(params.lambda_min_ratio, frac);
        coordinate_descent(s, lambda, params, beta, r);

        double rss = 0.0;
        for (double v : r) rss += v * v;
        const auto nz = static_cast<std::size_t>(std::count_if(beta.begin(), beta.end(), [](double b) {
            return b != 0.0;
        }));
        path.lambdas.push_back(lambda);
        path.fits.push_back(destandardize(s, beta, lambda));
        path.rss.push_back(rss);
        path.nonzero.push_back(nz);
        path.bic.push_back(bic(rss, s.n, nz + 1));
    }
    path.selected = static_cast<std::size_t>(std::min_element(path.bic.begin(), path.bic.end()) - path.bic.begin());
    return path;
}

}  // namespace fcmon
