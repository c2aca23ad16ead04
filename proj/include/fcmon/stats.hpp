#pragma once

#include <cstddef>
#include <span>

namespace fcmon {

struct TestResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    bool reject = false;
};

/// Count, mean and centered sum of squares of a sample. Summaries of disjoint
/// samples merge exactly (pairwise update), which lets a growing reference
/// sample be tested without re-scanning it.
struct SampleSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    static SampleSummary of(std::span<const double> xs);
    void merge(const SampleSummary& other);
    /// Unbiased (n-1) variance; 0 for n < 2.
    double variance() const noexcept { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for a Student t variable with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

/// Welch two-sample t-test of equal means against a two-sided alternative.
///
/// When both sample variances are below 1e-12 the t statistic is undefined;
/// the test then rejects exactly when the means differ by more than 1e-9
/// (p = 0), and accepts otherwise (p = 1). `reject` is p_value < alpha.
/// Throws InsufficientSample when either sample has fewer than 2 values.
TestResult mean_equality_test(std::span<const double> a, std::span<const double> b, double alpha);
TestResult mean_equality_test(const SampleSummary& a, const SampleSummary& b, double alpha);

/// n*log(rss/n) + k*log(n); rss is floored at 1e-12.
double bic(double rss, std::size_t n, std::size_t k);

/// Twice the negative maximized Gaussian log-likelihood of a segment with its
/// own mean and variance: n*(log(2*pi) + log(var) + 1), var floored at 1e-8.
double gaussian_segment_cost(std::span<const double> segment);

}  // namespace fcmon
