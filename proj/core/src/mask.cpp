// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gssfront/error.hpp"

namespace gssfront {

void MaskOptions::validate() const {
  if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
    fail(ErrorKind::kInvalidConfig, "mask threshold must be a finite value >= 0");
  }
  if (!(input_floor >= 0.0)) fail(ErrorKind::kInvalidConfig, "mask input floor must be >= 0");
  if (delta_half_width == 0) fail(ErrorKind::kInvalidConfig, "delta mask window must be >= 1");
}

BandEnergies band_energies(const PostfilterRecord& record, const MelFilterbank& bank) {
  return {bank.apply(record.input_power), bank.apply(record.output_power),
          bank.apply(record.stationary_noise)};
}

MaskRow compute_mask(std::span<const double> s_in, std::span<const double> s_out,
                     std::span<const double> noise, double threshold,
                     double input_floor) {
  const std::size_t bands = s_in.size();
  if (s_out.size() != bands || noise.size() != bands) {
    fail(ErrorKind::kStream, "mask energy vectors differ in length");
  }
  const double frame_energy = std::accumulate(s_in.begin(), s_in.end(), 0.0);
  const double floor = input_floor * frame_energy;
  MaskRow row;
  row.continuous.resize(bands);
  row.reliable.resize(bands);
  row.delta_reliable.assign(bands, 0);
  for (std::size_t i = 0; i < bands; ++i) {
    // Silent bands count as reliable.
    const bool silent = !(s_in[i] > floor && s_in[i] > 0.0);
    const double m = silent ? 1.0 : (s_out[i] + noise[i]) / s_in[i];
    row.continuous[i] = m;
    row.reliable[i] = (silent || m > threshold) ? 1 : 0;
  }
  return row;
}

std::vector<std::uint8_t> delta_mask(std::span<const MaskRow> window) {
  if (window.empty()) return {};
  const std::size_t bands = window.front().reliable.size();
  std::vector<std::uint8_t> out(bands, 1);
  for (const auto& row : window) {
    if (row.reliable.size() != bands) fail(ErrorKind::kStream, "mask rows differ in width");
    for (std::size_t i = 0; i < bands; ++i) out[i] = out[i] & row.reliable[i];
  }
  return out;
}

void fill_delta_masks(MaskMatrix& mask, std::size_t half_width) {
  const std::size_t n = mask.rows.size();
  const std::span<const MaskRow> rows(mask.rows);
  std::vector<std::vector<std::uint8_t>> deltas(n);
  for (std::size_t t = 0; t < n; ++t) {
    if (t >= half_width && t + half_width < n) {
      deltas[t] = delta_mask(rows.subspan(t - half_width, 2 * half_width + 1));
    } else {
      deltas[t].assign(mask.rows[t].reliable.size(), 0);
    }
  }
  for (std::size_t t = 0; t < n; ++t) mask.rows[t].delta_reliable = std::move(deltas[t]);
}

MaskMatrix build_mask(std::span<const BandEnergies> frames, const MaskOptions& options) {
  options.validate();
  MaskMatrix mask;
  mask.threshold = options.threshold;
  mask.num_bands = frames.empty() ? 0 : frames.front().input.size();
  mask.rows.reserve(frames.size());
  for (const auto& f : frames) {
    mask.rows.push_back(
        compute_mask(f.input, f.output, f.noise, options.threshold, options.input_floor));
  }
  fill_delta_masks(mask, options.delta_half_width);
  return mask;
}

std::vector<std::size_t> nearest_frame_map(std::size_t target_frames,
                                           double target_first_centre,
                                           double target_hop,
                                           std::size_t source_frames,
                                           double source_first_centre,
                                           double source_hop) {
  if (source_frames == 0 && target_frames > 0) {
    fail(ErrorKind::kStream, "no source frames to align against");
  }
  std::vector<std::size_t> map(target_frames);
  for (std::size_t t = 0; t < target_frames; ++t) {
    const double centre = target_first_centre + static_cast<double>(t) * target_hop;
    const double pos = (centre - source_first_centre) / source_hop;
    const double clamped =
        std::clamp(std::round(pos), 0.0, static_cast<double>(source_frames - 1));
    map[t] = static_cast<std::size_t>(clamped);
  }
  return map;
}

}  // namespace gssfront
