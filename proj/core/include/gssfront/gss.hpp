// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "gssfront/audio.hpp"
#include "gssfront/geometry.hpp"

namespace gssfront {

// Single-frequency building blocks of the separation update. W is M x N,
// A is N x M, x is the N-channel observation at one bin. Gradients follow
// the real-gradient convention dJ/dRe(W) + j dJ/dIm(W), i.e. twice the
// Wirtinger derivative dJ/dW*.
namespace gss {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// ||M||^2 = trace(M M^H)
double frobenius2(const Matrix& m);

// R_yy - diag(R_yy) with the instantaneous estimate R_yy = y y^H.
Matrix off_diagonal_correlation(const Vector& y);

double cost_j1(const Matrix& w, const Vector& x);
double cost_j2(const Matrix& w, const Matrix& a);

// 4 [E W x] x^H -- matrix-by-vector form.
Matrix gradient_j1(const Matrix& w, const Vector& x);
// 4 E W R_xx with E built from R_yy = W R_xx W^H.
Matrix gradient_j1_correlation(const Matrix& w, const Matrix& rxx);
// 2 [W A - I] A^H
Matrix gradient_j2(const Matrix& w, const Matrix& a);

// (||x||^2)^-2, or 0 when ||x||^2 is below `floor` (J1 term skipped).
double energy_normalization(const Vector& x, double floor);

}  // namespace gss

struct GssOptions {
  double mu = 0.01;
  double energy_floor = 1e-12;

  void validate() const;
  friend bool operator==(const GssOptions&, const GssOptions&) = default;
};

struct GradientPair {
  std::vector<gss::Matrix> j1;  // per bin, M x N
  std::vector<gss::Matrix> j2;
};

// W(k) = A(k)^H / N for every bin.
std::vector<gss::Matrix> init_delay_and_sum(const SteeringMatrix& steering);

// Frequency-domain geometric source separation with instantaneous
// correlation estimates. Owns the steering model, so sources can be added
// or removed between frames.
class GeometricSeparator {
 public:
  GeometricSeparator(ArrayGeometry geometry, SourceSet sources,
                     std::size_t fft_size, GssOptions options = {});

  std::size_t num_mics() const noexcept { return geometry_.num_mics(); }
  std::size_t num_sources() const noexcept { return sources_.size(); }
  std::size_t num_bins() const noexcept { return steering_.num_bins(); }
  std::size_t fft_size() const noexcept { return steering_.fft_size(); }
  const GssOptions& options() const noexcept { return options_; }
  const SourceSet& sources() const noexcept { return sources_; }
  const ArrayGeometry& geometry() const noexcept { return geometry_; }
  const SteeringMatrix& steering() const noexcept { return steering_; }

  const gss::Matrix& weights(std::size_t bin) const { return w_.at(bin); }
  const std::vector<gss::Matrix>& weights() const noexcept { return w_; }
  void set_weights(std::vector<gss::Matrix> w);

  // y(k) = W(k) x(k)
  SpectralFrame separate(const SpectralFrame& x) const;
  double cost_j1(const SpectralFrame& x) const;  // summed over bins
  double cost_j2() const;
  GradientPair gradients(const SpectralFrame& x) const;

  // W <- W - mu [alpha dJ1/dW* + dJ2/dW*], one step per bin.
  void adapt(const SpectralFrame& x);
  // separate() with the current weights, then adapt().
  SpectralFrame process(const SpectralFrame& x);

  // New row starts at the delay-and-sum solution for that source; other
  // rows are not touched.
  void add_source(const Source& source);
  // Unknown id logs a warning and returns false.
  bool remove_source(const std::string& id);

  bool weights_finite() const;
  std::size_t rejected_updates() const noexcept { return rejected_updates_; }

  // bin,source,mic,magnitude
  void write_weight_magnitudes_csv(std::ostream& out) const;

 private:
  void check_frame(const SpectralFrame& x) const;
  gss::Vector gather(const SpectralFrame& x, std::size_t bin) const;

  ArrayGeometry geometry_;
  SourceSet sources_;
  SteeringMatrix steering_;
  GssOptions options_;
  std::vector<gss::Matrix> w_;
  std::size_t rejected_updates_ = 0;
};

}  // namespace gssfront
