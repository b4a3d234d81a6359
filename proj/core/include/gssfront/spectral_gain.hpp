// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>

namespace gssfront {

inline constexpr double kGainMin = 0.001;
inline constexpr double kGainMax = 1.0;

// Confluent hypergeometric function M(a; c; z). Negative arguments go
// through Kummer's transformation M(a;c;z) = e^z M(c-a;c;-z) so the series
// never alternates; very large |z| (z < -40) uses the asymptotic expansion.
// Series terms are summed until the relative term falls below 1e-12, at most
// 200 terms.
double hypergeometric_1f1(double a, double c, double z);

// e^-x I0(x) and e^-x I1(x), x >= 0.
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);

// a-priori SNR xi, a-posteriori SNR gamma -> upsilon = gamma xi / (1 + xi)
double upsilon_of(double xi, double gamma);

// Raw MMSE |X|^alpha-domain gain from the hypergeometric form (no clamping).
double gain_h1_series(double xi, double gamma, double alpha);
// Raw alpha=1 (short-time spectral amplitude) gain from the Bessel form.
double gain_h1_bessel(double xi, double gamma);

// Gain assuming speech presence, clamped above at `gain_max`. alpha = 1 uses
// the Bessel form, alpha = 2 the closed form (sqrt(v)/gamma) sqrt(1+v),
// anything else the series. A non-finite result returns kGainMin and
// increments *incidents when given.
double gain_h1(double xi, double gamma, double alpha,
               std::size_t* incidents = nullptr, double gain_max = kGainMax);

// alpha_p G_H1^2(l-1) gamma(l-1) + (1 - alpha_p) max(gamma(l) - 1, 0)
double decision_directed_xi(double alpha_p, double previous_gain_h1,
                            double previous_gamma, double gamma);

// {1 + q/(1-q) (1+xi) exp(-upsilon)}^-1, with q -> 1 giving 0 and upsilon
// clamped to `upsilon_clamp` inside the exponential.
double speech_presence_probability(double q, double xi, double upsilon,
                                   double upsilon_clamp = 30.0);

}  // namespace gssfront
