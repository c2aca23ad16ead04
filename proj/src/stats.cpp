#include "fcmon/stats.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fcmon/errors.hpp"

namespace fcmon {

SampleSummary SampleSummary::of(std::span<const double> xs) {
    SampleSummary s;
    s.n = xs.size();
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    for (double x : xs) s.m2 += (x - s.mean) * (x - s.mean);
    return s;
}

void SampleSummary::merge(const SampleSummary& other) {
    if (other.n == 0) return;
    if (n == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(other.n);
    const double total = na + nb;
    const double delta = other.mean - mean;
    mean += delta * nb / total;
    m2 += other.m2 + delta * delta * na * nb / total;
    n += other.n;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    const double x = dof / (dof + t * t);
    double p = incomplete_beta(0.5 * dof, 0.5, x);
    if (p < 0.0) p = 0.0;
    if (p > 1.0) p = 1.0;
    return p;
}

TestResult mean_equality_test(const SampleSummary& a, const SampleSummary& b, double alpha) {
    if (a.n < 2 || b.n < 2) throw InsufficientSample("mean equality test needs at least 2 values per sample");

    const double va = a.variance();
    const double vb = b.variance();
    const double na = static_cast<double>(a.n);
    const double nb = static_cast<double>(b.n);
    TestResult r;

    if (va < 1e-12 && vb < 1e-12) {
        const double gap = a.mean - b.mean;
        r.dof = na + nb - 2.0;
        if (std::fabs(gap) > 1e-9) {
            r.statistic = std::copysign(std::numeric_limits<double>::infinity(), gap);
            r.p_value = 0.0;
        } else {
            r.statistic = 0.0;
            r.p_value = 1.0;
        }
        r.reject = r.p_value < alpha;
        return r;
    }

    const double sa = va / na;
    const double sb = vb / nb;
    const double se2 = sa + sb;
    r.statistic = (a.mean - b.mean) / std::sqrt(se2);
    r.dof = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    r.p_value = student_t_two_sided_p(r.statistic, r.dof);
    r.reject = r.p_value < alpha;
    return r;
}

TestResult mean_equality_test(std::span<const double> a, std::span<const double> b, double alpha) {
    return mean_equality_test(SampleSummary::of(a), SampleSummary::of(b), alpha);
}

double bic(double rss, std::size_t n, std::size_t k) {
    if (n == 0) throw InvalidArgument("bic needs n >= 1");
    const double nn = static_cast<double>(n);
    const double floored = std::max(rss, 1e-12);
    return nn * std::log(floored / nn) + static_cast<double>(k) * std::log(nn);
}

double gaussian_segment_cost(std::span<const double> segment) {
    if (segment.size() < 2) throw InsufficientSample("segment cost needs at least 2 values");
    const auto s = SampleSummary::of(segment);
    const double n = static_cast<double>(s.n);
    const double var = std::max(s.m2 / n, 1e-8);
    return n * (std::log(2.0 * std::numbers::pi) + std::log(var) + 1.0);
}

}  // namespace fcmon
