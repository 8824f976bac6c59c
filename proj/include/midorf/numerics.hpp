#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace midorf {

// Log-domain scores. Impossible configurations carry a dedicated sentinel
// that must be tested with is_impossible() before entering arithmetic.
inline constexpr double kImpossible = -std::numeric_limits<double>::infinity();

inline bool is_impossible(double log_score) { return std::isinf(log_score) && log_score < 0; }

// a + b in the log domain where either side may be the sentinel.
inline double score_add(double a, double b) {
    if (is_impossible(a) || is_impossible(b)) return kImpossible;
    return a + b;
}

// log(exp(a) + exp(b)), sentinel-aware.
inline double log_add(double a, double b) {
    if (is_impossible(a)) return b;
    if (is_impossible(b)) return a;
    double m = a > b ? a : b;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_sum_exp(std::span<const double> values);

// Standard normal density, CDF and quantile.
double norm_pdf(double z);
double norm_cdf(double z);
double norm_quantile(double p);  // inverse CDF, p in (0,1)

// log(Phi(upper - z) - Phi(lower - z)) for lower < upper, evaluated through
// whichever tail keeps precision; the difference is clamped below at 1e-300
// so the result is finite (>= log(1e-300)) and never NaN.
double log_interval_prob(double lower, double upper, double z);

// Same interval probability without the log, clamped to [1e-300, 1].
double interval_prob(double lower, double upper, double z);

}  // namespace midorf
