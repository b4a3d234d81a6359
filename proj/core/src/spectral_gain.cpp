// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/spectral_gain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gssfront {

namespace {

constexpr double kSeriesTolerance = 1e-12;
constexpr int kMaxSeriesTerms = 200;
constexpr double kAsymptoticThreshold = 40.0;

// Plain power series, valid for z >= 0 (all terms share a sign when a, c > 0).
double series_1f1(double a, double c, double z) {
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    term *= (a + n) / (c + n) * z / (n + 1);
    sum += term;
    if (std::abs(term) < kSeriesTolerance * std::abs(sum)) return sum;
  }
  return sum;
}

// M(a;c;-x) ~ Gamma(c)/Gamma(c-a) x^-a sum_s (a)_s (a-c+1)_s / s! x^-s
double asymptotic_1f1_negative(double a, double c, double x) {
  double term = 1.0;
  double sum = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int s = 0; s < kMaxSeriesTerms; ++s) {
    const double next = term * (a + s) * (a - c + 1 + s) / ((s + 1) * x);
    if (next == 0.0) break;
    if (std::abs(next) >= previous) break;  // series is only asymptotic
    previous = std::abs(next);
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  const double log_scale =
      std::lgamma(c) - std::lgamma(c - a) - a * std::log(x);
  double sign = 1.0;
  if (std::tgamma(c - a) < 0.0) sign = -1.0;
  return sign * std::exp(log_scale) * sum;
}

// Asymptotic e^-x I_nu(x) for large x.
double bessel_scaled_asymptotic(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (k * 8.0 * x);
    sum += term;
    if (std::abs(term) < 1e-17) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

constexpr double kBesselDirectLimit = 500.0;

}  // namespace

double hypergeometric_1f1(double a, double c, double z) {
  if (z >= 0.0) return series_1f1(a, c, z);
  const double x = -z;
  if (x > kAsymptoticThreshold) return asymptotic_1f1_negative(a, c, x);
  return std::exp(z) * series_1f1(c - a, c, x);
}

double bessel_i0_scaled(double x) {
  if (x < kBesselDirectLimit) return std::exp(-x) * std::cyl_bessel_i(0.0, x);
  return bessel_scaled_asymptotic(0.0, x);
}

double bessel_i1_scaled(double x) {
  if (x < kBesselDirectLimit) return std::exp(-x) * std::cyl_bessel_i(1.0, x);
  return bessel_scaled_asymptotic(1.0, x);
}

double upsilon_of(double xi, double gamma) { return gamma * xi / (xi + 1.0); }

double gain_h1_series(double xi, double gamma, double alpha) {
  const double v = upsilon_of(xi, gamma);
  if (v <= 0.0) return 0.0;
  const double m = hypergeometric_1f1(-alpha / 2.0, 1.0, -v);
  return std::sqrt(v) / gamma * std::pow(std::tgamma(1.0 + alpha / 2.0) * m, 1.0 / alpha);
}

double gain_h1_bessel(double xi, double gamma) {
  const double v = upsilon_of(xi, gamma);
  if (v <= 0.0) return 0.0;
  const double half = v / 2.0;
  return std::sqrt(std::numbers::pi) / 2.0 * std::sqrt(v) / gamma *
         ((1.0 + v) * bessel_i0_scaled(half) + v * bessel_i1_scaled(half));
}

double gain_h1(double xi, double gamma, double alpha, std::size_t* incidents,
               double gain_max) {
  double g = 0.0;
  if (std::isnan(xi) || std::isnan(gamma)) {
    g = std::numeric_limits<double>::quiet_NaN();
  } else if (gamma > 0.0 && xi > 0.0) {
    if (alpha == 1.0) {
      g = gain_h1_bessel(xi, gamma);
    } else if (alpha == 2.0) {
      const double v = upsilon_of(xi, gamma);
      g = std::sqrt(v) / gamma * std::sqrt(1.0 + v);
    } else {
      g = gain_h1_series(xi, gamma, alpha);
    }
  }
  if (!std::isfinite(g)) {
    if (incidents) ++*incidents;
    return kGainMin;
  }
  return std::min(g, gain_max);
}

double decision_directed_xi(double alpha_p, double previous_gain_h1,
                            double previous_gamma, double gamma) {
  return alpha_p * previous_gain_h1 * previous_gain_h1 * previous_gamma +
         (1.0 - alpha_p) * std::max(gamma - 1.0, 0.0);
}

double speech_presence_probability(double q, double xi, double upsilon,
                                   double upsilon_clamp) {
  if (q <= 0.0) return 1.0;
  if (q >= 1.0) return 0.0;
  const double v = std::min(upsilon, upsilon_clamp);
  return 1.0 / (1.0 + q / (1.0 - q) * (1.0 + xi) * std::exp(-v));
}

}  // namespace gssfront
