#pragma once

#include <cmath>
#include <numbers>

namespace vhft {

/// Standard normal CDF.
inline double std_normal_cdf(double t) { return 0.5 * std::erfc(-t * std::numbers::sqrt2 / 2.0); }

/// Gaussian CDF C(z; mean, sigma^2). Degenerates to a step when sigma == 0.
inline double normal_cdf(double z, double mean, double sigma) {
    if (sigma <= 0.0) {
        if (z > mean) return 1.0;
        if (z < mean) return 0.0;
        return 0.5;
    }
    return std_normal_cdf((z - mean) / sigma);
}

/// Gaussian density N(z; mean, sigma^2).
inline double normal_pdf(double z, double mean, double sigma) {
    const double inv = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    const double t = (z - mean) / sigma;
    return inv * std::exp(-0.5 * t * t);
}

/// Binary entropy of a probability, in nats. Zero at r in {0, 1}.
inline double binary_entropy(double r) {
    double h = 0.0;
    if (r > 0.0) h -= r * std::log(r);
    if (r < 1.0) h -= (1.0 - r) * std::log(1.0 - r);
    return h;
}

/// Standard normal quantile (Acklam's rational approximation, refined with
/// one Halley step; good to ~1e-12 over (0, 1)).
inline double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::infinity();
    }
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // one Halley refinement against the CDF
    const double e = std_normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

}  // namespace vhft
