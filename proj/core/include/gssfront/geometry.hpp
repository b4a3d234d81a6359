// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gssfront/audio.hpp"

namespace gssfront {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

// Azimuth is measured counter-clockwise from +x in the horizontal plane,
// elevation upward from that plane. Both in radians.
Vec3 direction_from_angles(double azimuth, double elevation);

inline constexpr double kSpeedOfSound = 343.0;

// Microphone placement. Positions are stored relative to the centroid of the
// array, which is the reference point for all delays.
class ArrayGeometry {
 public:
  explicit ArrayGeometry(std::vector<Vec3> mic_positions,
                         double speed_of_sound = kSpeedOfSound,
                         int rate = kSeparationRate);

  std::size_t num_mics() const noexcept { return positions_.size(); }
  const std::vector<Vec3>& positions() const noexcept { return positions_; }
  const std::vector<Vec3>& input_positions() const noexcept { return input_; }
  const Vec3& centroid() const noexcept { return centroid_; }
  double speed_of_sound() const noexcept { return speed_of_sound_; }
  int rate() const noexcept { return rate_; }

 private:
  std::vector<Vec3> input_;
  std::vector<Vec3> positions_;
  Vec3 centroid_;
  double speed_of_sound_;
  int rate_;
};

// Arrival delay in samples at `mic` for a plane wave from `direction`
// (unit vector pointing toward the source), relative to the array centroid.
// Microphones closer to the source get negative delays.
double far_field_delay(const ArrayGeometry& geometry, std::size_t mic,
                       const Vec3& direction);

struct Source {
  std::string id;
  double azimuth = 0.0;    // radians
  double elevation = 0.0;  // radians

  Vec3 direction() const { return direction_from_angles(azimuth, elevation); }
  friend bool operator==(const Source&, const Source&) = default;
};

class SourceSet {
 public:
  SourceSet() = default;
  explicit SourceSet(std::vector<Source> sources);

  std::size_t size() const noexcept { return sources_.size(); }
  bool empty() const noexcept { return sources_.empty(); }
  const Source& operator[](std::size_t i) const { return sources_.at(i); }
  const std::vector<Source>& sources() const noexcept { return sources_; }
  std::optional<std::size_t> find(const std::string& id) const;

  void add(Source source);       // throws on duplicate id
  bool remove(const std::string& id);

 private:
  std::vector<Source> sources_;
};

// Free-field transfer matrix A(k) (N x M) for bins k = 0..K/2, with
// a_ij(k) = exp(-j 2 pi k delta_ij / K).
class SteeringMatrix {
 public:
  SteeringMatrix(const ArrayGeometry& geometry, const SourceSet& sources,
                 std::size_t fft_size);

  std::size_t fft_size() const noexcept { return fft_size_; }
  std::size_t num_bins() const noexcept { return fft_size_ / 2 + 1; }
  std::size_t num_mics() const noexcept { return num_mics_; }
  std::size_t num_sources() const noexcept {
    return static_cast<std::size_t>(delays_.cols());
  }

  const Eigen::MatrixXcd& at(std::size_t bin) const { return per_bin_.at(bin); }
  double delay(std::size_t mic, std::size_t source) const {
    return delays_(mic, source);
  }
  // Steering column for one direction, length N, at bin k.
  Eigen::VectorXcd column_for(std::span<const double> delays, std::size_t bin) const;

  void append_source(const ArrayGeometry& geometry, const Source& source);
  void remove_source(std::size_t index);

 private:
  std::size_t fft_size_;
  std::size_t num_mics_;
  Eigen::MatrixXd delays_;  // N x M, samples
  std::vector<Eigen::MatrixXcd> per_bin_;
};

// phase of exp(-j 2 pi k delay / K)
Complex steering_entry(double delay_samples, std::size_t bin, std::size_t fft_size);

SteeringMatrix steering_matrix(const ArrayGeometry& geometry,
                               const SourceSet& sources, std::size_t fft_size);

}  // namespace gssfront
