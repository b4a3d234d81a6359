// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Pipeline configuration and its JSON form. Keys carry their units
// (azimuth_deg, xi_min_db, speed_of_sound_mps); ratios are plain numbers.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "gssfront/features.hpp"
#include "gssfront/geometry.hpp"
#include "gssfront/gss.hpp"
#include "gssfront/mask.hpp"
#include "gssfront/postfilter.hpp"
#include "gssfront/stft.hpp"

namespace gssfront {

enum class SeparationMode { kGss, kDelayAndSum };
enum class FileFormat { kBinary, kCsv, kBoth };

struct SourceDirection {
  std::string id;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;

  Source to_source() const;
  friend bool operator==(const SourceDirection&, const SourceDirection&) = default;
};

struct PipelineConfig {
  std::string scene_preset;  // fills geometry and sources when they are absent
  std::vector<Vec3> mics;
  double speed_of_sound = kSpeedOfSound;
  std::vector<SourceDirection> sources;

  StftConfig stft;
  SeparationMode mode = SeparationMode::kGss;
  GssOptions gss;

  bool postfilter_enabled = true;
  PostfilterOptions postfilter;

  bool features_enabled = true;
  FeatureOptions features;
  FileFormat feature_format = FileFormat::kBinary;

  bool mask_enabled = true;
  MaskOptions mask;

  std::string input_wav;
  std::string output_dir = "out";
  std::string reference_dir;  // scene directory with ref_<id>.wav and noise.wav

  bool threaded = false;
  std::size_t queue_capacity = 8;
  bool dump_diagnostics = false;

  void validate() const;
  ArrayGeometry geometry() const;
  SourceSet source_set() const;
  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// Malformed text or unknown keys raise kConfigParse; out-of-range values
// raise kInvalidConfig. Pass validate=false to defer range checks until
// command-line overrides are applied.
PipelineConfig config_from_json(const std::string& text, bool validate = true);
std::string config_to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::filesystem::path& path, bool validate = true);
// Geometry and sources of the named scene preset.
void apply_preset(PipelineConfig& config, const std::string& preset_name);

std::string to_string(SeparationMode mode);
std::string to_string(FileFormat format);

}  // namespace gssfront
