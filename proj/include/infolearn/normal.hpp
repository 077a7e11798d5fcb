#pragma once

// Standard normal distribution helpers with log-domain tails that stay
// accurate far below the double-precision underflow threshold.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace infolearn::normal {

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

// Below this z, erfc loses relative precision as the result approaches the
// subnormal range; switch to the asymptotic expansion of the Mills ratio.
inline constexpr double kAsymptoticCutoff = -20.0;

/// Standard normal CDF.
inline double cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

/// log Phi(z) for z <= kAsymptoticCutoff:
///   -z^2/2 - log(-z) - log sqrt(2 pi) + log(1 - 1/z^2 + 3/z^4 - 15/z^6 + ...)
inline double log_cdf_asymptotic(double z) {
  const double x = -z;
  const double inv_x2 = 1.0 / (x * x);
  // (2k-1)!! / x^(2k) with alternating sign; the terms shrink monotonically
  // for x >= 20 well past the point where they drop below 1e-17.
  double term = 1.0;
  double series = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -(2.0 * k - 1.0) * inv_x2;
    series += term;
  }
  return -0.5 * x * x - std::log(x) - kLogSqrt2Pi + std::log(series);
}

/// log Phi(z), accurate over the whole real line.
inline double log_cdf(double z) {
  if (std::isnan(z)) return z;
  if (z == std::numeric_limits<double>::infinity()) return 0.0;
  if (z == -std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
  if (z < kAsymptoticCutoff) return log_cdf_asymptotic(z);
  if (z > 0.0) return std::log1p(-0.5 * std::erfc(z / kSqrt2));
  return std::log(0.5 * std::erfc(-z / kSqrt2));
}

/// log(1 - Phi(z)) = log Phi(-z).
inline double log_sf(double z) { return log_cdf(-z); }

inline double log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// polished with two Halley steps against the erfc-based CDF).
inline double quantile(double u) {
  if (!(u > 0.0)) return -std::numeric_limits<double>::infinity();
  if (!(u < 1.0)) return std::numeric_limits<double>::infinity();

  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549732539343734e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (u < p_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - p_low) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  for (int i = 0; i < 2; ++i) {
    // Residual F(x) - u, taken on the smaller tail to keep relative precision.
    const double e = x < 0.0 ? cdf(x) - u : (1.0 - u) - cdf(-x);
    const double step = e * std::exp(-log_pdf(x));
    x = x - step / (1.0 + 0.5 * x * step);
  }
  return x;
}

/// log(exp(a) + exp(b)) without overflow; either argument may be -inf.
inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

/// log(exp(a) - exp(b)) for a >= b.
inline double log_sub_exp(double a, double b) {
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log(-std::expm1(b - a));
}

}  // namespace infolearn::normal
