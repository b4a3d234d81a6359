// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/gss.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <ostream>

#include "gssfront/error.hpp"

namespace gssfront {

namespace gss {

double frobenius2(const Matrix& m) { return m.squaredNorm(); }

Matrix off_diagonal_correlation(const Vector& y) {
  Matrix e = y * y.adjoint();
  e.diagonal().setZero();
  return e;
}

double cost_j1(const Matrix& w, const Vector& x) {
  const Vector y = w * x;
  return frobenius2(off_diagonal_correlation(y));
}

double cost_j2(const Matrix& w, const Matrix& a) {
  Matrix err = w * a;
  err.diagonal().array() -= 1.0;
  return frobenius2(err);
}

Matrix gradient_j1(const Matrix& w, const Vector& x) {
  const Vector y = w * x;
  const Vector ewx = off_diagonal_correlation(y) * y;
  return 4.0 * ewx * x.adjoint();
}

Matrix gradient_j1_correlation(const Matrix& w, const Matrix& rxx) {
  Matrix e = w * rxx * w.adjoint();
  e.diagonal().setZero();
  return 4.0 * e * w * rxx;
}

Matrix gradient_j2(const Matrix& w, const Matrix& a) {
  Matrix err = w * a;
  err.diagonal().array() -= 1.0;
  return 2.0 * err * a.adjoint();
}

double energy_normalization(const Vector& x, double floor) {
  const double e = x.squaredNorm();
  if (e < floor) return 0.0;
  return 1.0 / (e * e);
}

}  // namespace gss

void GssOptions::validate() const {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    fail(ErrorKind::kInvalidConfig, "adaptation rate mu must be >= 0");
  }
  if (!(energy_floor > 0.0)) {
    fail(ErrorKind::kInvalidConfig, "energy floor must be positive");
  }
}

std::vector<gss::Matrix> init_delay_and_sum(const SteeringMatrix& steering) {
  std::vector<gss::Matrix> w(steering.num_bins());
  const double inv_n = 1.0 / static_cast<double>(steering.num_mics());
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = steering.at(k).adjoint() * inv_n;
  }
  return w;
}

GeometricSeparator::GeometricSeparator(ArrayGeometry geometry, SourceSet sources,
                                       std::size_t fft_size, GssOptions options)
    : geometry_(std::move(geometry)),
      sources_(std::move(sources)),
      steering_(geometry_, sources_, fft_size),
      options_(options),
      w_(init_delay_and_sum(steering_)) {
  options_.validate();
}

void GeometricSeparator::set_weights(std::vector<gss::Matrix> w) {
  if (w.size() != num_bins()) fail(ErrorKind::kStream, "weight bin count mismatch");
  for (const auto& m : w) {
    if (static_cast<std::size_t>(m.rows()) != num_sources() ||
        static_cast<std::size_t>(m.cols()) != num_mics()) {
      fail(ErrorKind::kStream, "weight matrix shape mismatch");
    }
  }
  w_ = std::move(w);
}

void GeometricSeparator::check_frame(const SpectralFrame& x) const {
  if (x.channels() != num_mics()) {
    fail(ErrorKind::kStream, "frame has " + std::to_string(x.channels()) +
                                 " channels, separator expects " +
                                 std::to_string(num_mics()));
  }
  if (x.fft_size != fft_size()) {
    fail(ErrorKind::kStream, "frame fft_size does not match steering model");
  }
}

gss::Vector GeometricSeparator::gather(const SpectralFrame& x,
                                       std::size_t bin) const {
  gss::Vector v(static_cast<Eigen::Index>(num_mics()));
  for (std::size_t c = 0; c < num_mics(); ++c) {
    v(static_cast<Eigen::Index>(c)) = x.bins[c][bin];
  }
  return v;
}

SpectralFrame GeometricSeparator::separate(const SpectralFrame& x) const {
  check_frame(x);
  SpectralFrame y(x.index, x.fft_size, x.rate, num_sources());
  for (std::size_t k = 0; k < num_bins(); ++k) {
    const gss::Vector yk = w_[k] * gather(x, k);
    for (std::size_t m = 0; m < num_sources(); ++m) {
      y.bins[m][k] = yk(static_cast<Eigen::Index>(m));
    }
  }
  return y;
}

double GeometricSeparator::cost_j1(const SpectralFrame& x) const {
  check_frame(x);
  double total = 0.0;
  for (std::size_t k = 0; k < num_bins(); ++k) total += gss::cost_j1(w_[k], gather(x, k));
  return total;
}

double GeometricSeparator::cost_j2() const {
  double total = 0.0;
  for (std::size_t k = 0; k < num_bins(); ++k) total += gss::cost_j2(w_[k], steering_.at(k));
  return total;
}

GradientPair GeometricSeparator::gradients(const SpectralFrame& x) const {
  check_frame(x);
  GradientPair g;
  g.j1.reserve(num_bins());
  g.j2.reserve(num_bins());
  for (std::size_t k = 0; k < num_bins(); ++k) {
    g.j1.push_back(gss::gradient_j1(w_[k], gather(x, k)));
    g.j2.push_back(gss::gradient_j2(w_[k], steering_.at(k)));
  }
  return g;
}

void GeometricSeparator::adapt(const SpectralFrame& x) {
  check_frame(x);
  if (num_sources() == 0 || options_.mu == 0.0) return;
  for (std::size_t k = 0; k < num_bins(); ++k) {
    const gss::Vector xk = gather(x, k);
    const double alpha = gss::energy_normalization(xk, options_.energy_floor);
    gss::Matrix step = gss::gradient_j2(w_[k], steering_.at(k));
    if (alpha > 0.0) step += alpha * gss::gradient_j1(w_[k], xk);
    gss::Matrix next = w_[k] - options_.mu * step;
    if (next.allFinite()) {
      w_[k] = std::move(next);
    } else {
      ++rejected_updates_;
    }
  }
}

SpectralFrame GeometricSeparator::process(const SpectralFrame& x) {
  SpectralFrame y = separate(x);
  adapt(x);
  return y;
}

void GeometricSeparator::add_source(const Source& source) {
  if (sources_.find(source.id)) {
    fail(ErrorKind::kInvalidConfig, "source '" + source.id + "' already active");
  }
  steering_.append_source(geometry_, source);
  sources_.add(source);
  const double inv_n = 1.0 / static_cast<double>(num_mics());
  const auto m = static_cast<Eigen::Index>(num_sources() - 1);
  for (std::size_t k = 0; k < num_bins(); ++k) {
    w_[k].conservativeResize(m + 1, Eigen::NoChange);
    w_[k].row(m) = steering_.at(k).col(m).adjoint() * inv_n;
  }
}

bool GeometricSeparator::remove_source(const std::string& id) {
  const auto idx = sources_.find(id);
  if (!idx) {
    spdlog::warn("remove_source: unknown source id '{}'", id);
    return false;
  }
  const auto j = static_cast<Eigen::Index>(*idx);
  const auto m = static_cast<Eigen::Index>(num_sources());
  for (auto& w : w_) {
    const auto tail = m - j - 1;
    if (tail > 0) w.middleRows(j, tail) = w.bottomRows(tail).eval();
    w.conservativeResize(m - 1, Eigen::NoChange);
  }
  steering_.remove_source(*idx);
  sources_.remove(id);
  return true;
}

bool GeometricSeparator::weights_finite() const {
  for (const auto& w : w_) {
    if (!w.allFinite()) return false;
  }
  return true;
}

void GeometricSeparator::write_weight_magnitudes_csv(std::ostream& out) const {
  out << "bin,source,mic,magnitude\n";
  for (std::size_t k = 0; k < num_bins(); ++k) {
    for (std::size_t m = 0; m < num_sources(); ++m) {
      for (std::size_t n = 0; n < num_mics(); ++n) {
        out << k << ',' << sources_[m].id << ',' << n << ','
            << std::abs(w_[k](static_cast<Eigen::Index>(m),
                              static_cast<Eigen::Index>(n)))
            << '\n';
      }
    }
  }
}

}  // namespace gssfront
