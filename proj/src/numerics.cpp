#include "midorf/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace midorf {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kProbFloor = 1e-300;
}  // namespace

double log_sum_exp(std::span<const double> values) {
    double m = kImpossible;
    for (double v : values)
        if (!is_impossible(v)) m = std::max(m, v);
    if (is_impossible(m)) return kImpossible;
    double s = 0.0;
    for (double v : values)
        if (!is_impossible(v)) s += std::exp(v - m);
    return m + std::log(s);
}

double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

// Acklam's rational approximation refined with one Halley step; absolute
// error is below 1e-15 over (0,1).
double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_quantile: p must be in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double e = norm_cdf(x) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

double interval_prob(double lower, double upper, double z) {
    assert(lower < upper);
    double hi = upper - z, lo = lower - z;
    double p;
    if (hi + lo > 0.0) {
        // both bounds in (or toward) the upper tail: take complementary CDFs
        p = norm_cdf(-lo) - norm_cdf(-hi);
    } else {
        p = norm_cdf(hi) - norm_cdf(lo);
    }
    return std::clamp(p, kProbFloor, 1.0);
}

double log_interval_prob(double lower, double upper, double z) {
    return std::log(interval_prob(lower, upper, z));
}

}  // namespace midorf
