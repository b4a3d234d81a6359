// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/geometry.hpp"

#include <cmath>
#include <numbers>
#include <unordered_set>

#include "gssfront/error.hpp"

namespace gssfront {

Vec3 direction_from_angles(double azimuth, double elevation) {
  return {std::cos(elevation) * std::cos(azimuth),
          std::cos(elevation) * std::sin(azimuth), std::sin(elevation)};
}

ArrayGeometry::ArrayGeometry(std::vector<Vec3> mic_positions,
                             double speed_of_sound, int rate)
    : input_(std::move(mic_positions)),
      speed_of_sound_(speed_of_sound),
      rate_(rate) {
  if (input_.size() < 2) {
    fail(ErrorKind::kInvalidConfig, "array geometry needs at least 2 microphones");
  }
  if (!(speed_of_sound_ > 0.0) || !std::isfinite(speed_of_sound_)) {
    fail(ErrorKind::kInvalidConfig, "speed of sound must be positive");
  }
  if (rate_ <= 0) fail(ErrorKind::kInvalidConfig, "rate must be positive");
  for (const auto& p : input_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      fail(ErrorKind::kInvalidConfig, "microphone position is not finite");
    }
    centroid_.x += p.x;
    centroid_.y += p.y;
    centroid_.z += p.z;
  }
  const double n = static_cast<double>(input_.size());
  centroid_ = {centroid_.x / n, centroid_.y / n, centroid_.z / n};
  positions_.reserve(input_.size());
  for (const auto& p : input_) {
    positions_.push_back({p.x - centroid_.x, p.y - centroid_.y, p.z - centroid_.z});
  }
}

double far_field_delay(const ArrayGeometry& geometry, std::size_t mic,
                       const Vec3& direction) {
  if (std::abs(dot(direction, direction) - 1.0) > 1e-9) {
    fail(ErrorKind::kInvalidInput, "direction must be a unit vector");
  }
  const Vec3& p = geometry.positions().at(mic);
  return -dot(p, direction) * geometry.rate() / geometry.speed_of_sound();
}

SourceSet::SourceSet(std::vector<Source> sources) {
  for (auto& s : sources) add(std::move(s));
}

std::optional<std::size_t> SourceSet::find(const std::string& id) const {
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    if (sources_[i].id == id) return i;
  }
  return std::nullopt;
}

void SourceSet::add(Source source) {
  if (find(source.id)) {
    fail(ErrorKind::kInvalidConfig, "duplicate source id '" + source.id + "'");
  }
  sources_.push_back(std::move(source));
}

bool SourceSet::remove(const std::string& id) {
  const auto idx = find(id);
  if (!idx) return false;
  sources_.erase(sources_.begin() + static_cast<std::ptrdiff_t>(*idx));
  return true;
}

Complex steering_entry(double delay_samples, std::size_t bin, std::size_t fft_size) {
  const double phase = -2.0 * std::numbers::pi * static_cast<double>(bin) *
                       delay_samples / static_cast<double>(fft_size);
  return std::polar(1.0, phase);
}

SteeringMatrix::SteeringMatrix(const ArrayGeometry& geometry,
                               const SourceSet& sources, std::size_t fft_size)
    : fft_size_(fft_size),
      num_mics_(geometry.num_mics()),
      delays_(geometry.num_mics(), 0),
      per_bin_(fft_size / 2 + 1, Eigen::MatrixXcd(geometry.num_mics(), 0)) {
  if (fft_size < 2 || fft_size % 2 != 0) {
    fail(ErrorKind::kInvalidConfig, "steering fft_size must be even");
  }
  if (sources.size() > geometry.num_mics()) {
    fail(ErrorKind::kOverDetermined,
         std::to_string(sources.size()) + " sources exceed " +
             std::to_string(geometry.num_mics()) + " microphones");
  }
  for (const auto& s : sources.sources()) append_source(geometry, s);
}

Eigen::VectorXcd SteeringMatrix::column_for(std::span<const double> delays,
                                            std::size_t bin) const {
  Eigen::VectorXcd col(static_cast<Eigen::Index>(delays.size()));
  for (std::size_t i = 0; i < delays.size(); ++i) {
    col(static_cast<Eigen::Index>(i)) = steering_entry(delays[i], bin, fft_size_);
  }
  return col;
}

void SteeringMatrix::append_source(const ArrayGeometry& geometry,
                                   const Source& source) {
  if (geometry.num_mics() != num_mics_) {
    fail(ErrorKind::kStream, "geometry does not match steering matrix");
  }
  if (num_sources() + 1 > num_mics_) {
    fail(ErrorKind::kOverDetermined,
         "adding source '" + source.id + "' would exceed " +
             std::to_string(num_mics_) + " microphones");
  }
  const Vec3 u = source.direction();
  std::vector<double> d(num_mics_);
  for (std::size_t i = 0; i < num_mics_; ++i) d[i] = far_field_delay(geometry, i, u);

  const Eigen::Index m = delays_.cols();
  delays_.conservativeResize(Eigen::NoChange, m + 1);
  for (std::size_t i = 0; i < num_mics_; ++i) delays_(static_cast<Eigen::Index>(i), m) = d[i];
  for (std::size_t k = 0; k < per_bin_.size(); ++k) {
    per_bin_[k].conservativeResize(Eigen::NoChange, m + 1);
    per_bin_[k].col(m) = column_for(d, k);
  }
}

void SteeringMatrix::remove_source(std::size_t index) {
  const auto m = delays_.cols();
  const auto j = static_cast<Eigen::Index>(index);
  if (j >= m) fail(ErrorKind::kInvalidInput, "steering column out of range");
  auto drop_col = [&](auto& mat) {
    const auto tail = m - j - 1;
    if (tail > 0) mat.middleCols(j, tail) = mat.rightCols(tail).eval();
    mat.conservativeResize(Eigen::NoChange, m - 1);
  };
  drop_col(delays_);
  for (auto& a : per_bin_) drop_col(a);
}

SteeringMatrix steering_matrix(const ArrayGeometry& geometry,
                               const SourceSet& sources, std::size_t fft_size) {
  return SteeringMatrix(geometry, sources, fft_size);
}

}  // namespace gssfront
