// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Independent reference computations. Nothing here calls into the library
// code it is used to check.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gssfront::testing {

inline constexpr double kPi = std::numbers::pi;

// Direct O(n^2) DFT, bins 0..n/2.
inline std::vector<std::complex<double>> naive_dft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t t = 0; t < n; ++t) {
      const long double ph = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k * t % n) /
                             static_cast<long double>(n);
      re += x[t] * std::cos(ph);
      im += x[t] * std::sin(ph);
    }
    out[k] = {static_cast<double>(re), static_cast<double>(im)};
  }
  return out;
}

// Gradient with respect to conj(W) in the real-gradient convention
// dJ/dRe + j dJ/dIm, by central differences.
inline Eigen::MatrixXcd finite_difference_gradient(
    const std::function<double(const Eigen::MatrixXcd&)>& cost, const Eigen::MatrixXcd& w,
    double h = 1e-6) {
  Eigen::MatrixXcd g(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      Eigen::MatrixXcd p = w, m = w;
      p(i, j) += h;
      m(i, j) -= h;
      const double dre = (cost(p) - cost(m)) / (2.0 * h);
      p = w;
      m = w;
      p(i, j) += std::complex<double>(0.0, h);
      m(i, j) -= std::complex<double>(0.0, h);
      const double dim = (cost(p) - cost(m)) / (2.0 * h);
      g(i, j) = {dre, dim};
    }
  }
  return g;
}

// Element-sum oracles for the two separation costs.
inline double brute_j1(const Eigen::MatrixXcd& w, const Eigen::VectorXcd& x) {
  std::vector<std::complex<double>> y(static_cast<std::size_t>(w.rows()), 0.0);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index n = 0; n < w.cols(); ++n) y[static_cast<std::size_t>(i)] += w(i, n) * x(n);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (i != j) s += std::norm(y[i] * std::conj(y[j]));
    }
  }
  return s;
}

inline double brute_j2(const Eigen::MatrixXcd& w, const Eigen::MatrixXcd& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      std::complex<double> v = 0.0;
      for (Eigen::Index n = 0; n < w.cols(); ++n) v += w(i, n) * a(n, j);
      if (i == j) v -= 1.0;
      s += std::norm(v);
    }
  }
  return s;
}

// Plain Kummer series M(a; c; z) in long double, no transformation. Only
// trustworthy for moderate |z|.
inline double kummer_direct(double a, double c, double z, int max_terms = 400) {
  long double term = 1.0L, sum = 1.0L;
  for (int n = 0; n < max_terms; ++n) {
    term *= (static_cast<long double>(a) + n) / (static_cast<long double>(c) + n) *
            static_cast<long double>(z) / (n + 1);
    sum += term;
    if (std::abs(term) < 1e-22L * std::abs(sum)) break;
  }
  return static_cast<double>(sum);
}

// Least-squares amplitude of a sinusoid at frequency f in x.
inline double tone_amplitude(std::span<const double> x, double f, double rate) {
  double cc = 0, ss = 0, cs = 0, xc = 0, xs = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double ph = 2.0 * kPi * f * static_cast<double>(n) / rate;
    const double c = std::cos(ph), s = std::sin(ph);
    cc += c * c;
    ss += s * s;
    cs += c * s;
    xc += x[n] * c;
    xs += x[n] * s;
  }
  const double det = cc * ss - cs * cs;
  const double a = (xc * ss - xs * cs) / det;
  const double b = (xs * cc - xc * cs) / det;
  return std::hypot(a, b);
}

// Lag of b relative to a (b ~ a delayed by the result), from the peak of the
// sinc-interpolated cross-correlation.
inline double cross_correlation_delay(std::span<const double> a, std::span<const double> b,
                                      int max_lag) {
  const auto n = static_cast<int>(a.size());
  std::vector<double> r(2 * max_lag + 1, 0.0);
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (int t = 0; t < n; ++t) {
      const int u = t + lag;
      if (u >= 0 && u < n) s += a[static_cast<std::size_t>(t)] * b[static_cast<std::size_t>(u)];
    }
    r[static_cast<std::size_t>(lag + max_lag)] = s;
  }
  int best = 0;
  for (int i = 1; i < static_cast<int>(r.size()); ++i) {
    if (r[static_cast<std::size_t>(i)] > r[static_cast<std::size_t>(best)]) best = i;
  }
  auto interp = [&](double tau) {
    double s = 0.0;
    for (int i = 0; i < static_cast<int>(r.size()); ++i) {
      const double u = tau - i;
      s += r[static_cast<std::size_t>(i)] * (std::abs(u) < 1e-12 ? 1.0 : std::sin(kPi * u) / (kPi * u));
    }
    return s;
  };
  double lo = best - 1.0, hi = best + 1.0;
  for (int it = 0; it < 100; ++it) {  // golden-section search for the peak
    const double m1 = hi - (hi - lo) / 1.618033988749895;
    const double m2 = lo + (hi - lo) / 1.618033988749895;
    if (interp(m1) < interp(m2)) lo = m1; else hi = m2;
  }
  return 0.5 * (lo + hi) - max_lag;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// Composite Gauss-Legendre integral of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        int panels = 64, int order = 20) {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < order; ++i) {
      s += w[static_cast<std::size_t>(i)] * f(lo + 0.5 * h * (x[static_cast<std::size_t>(i)] + 1.0));
    }
  }
  return s * 0.5 * h;
}

inline double gaussian_pdf(double x, double mu, double var) {
  const double e = x - mu;
  return std::exp(-0.5 * e * e / var) / std::sqrt(2.0 * kPi * var);
}

inline double energy(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace gssfront::testing
