// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Anechoic far-field array scenes with synthetic speech-like sources.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gssfront/audio.hpp"
#include "gssfront/geometry.hpp"

namespace gssfront {

enum class SignalKind {
  kHarmonic,         // random-phase harmonic train, drifting pitch, syllabic envelope
  kModulatedNoise,   // 300-7000 Hz noise under a slow amplitude modulation
};

struct SceneSource {
  std::string id;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double distance_m = 2.0;
  SignalKind kind = SignalKind::kHarmonic;
  double gain_dbfs = -26.0;  // RMS over the active span
  double onset_s = 0.0;
  std::optional<double> end_s;  // active to the end when unset
  double pitch_hz = 120.0;
  std::vector<double> formants_hz;  // harmonic amplitude shaping, optional
  double modulation_hz = 4.0;
  std::string clean_wav;  // mono file at the scene rate replaces the generator

  Source steering_source() const;
  friend bool operator==(const SceneSource&, const SceneSource&) = default;
};

struct SceneSpec {
  std::string name = "scene";
  int rate = kSeparationRate;
  double duration_s = 8.0;
  std::uint64_t seed = 1;
  std::optional<double> noise_dbfs = -60.0;  // per-channel RMS; unset for none
  double speed_of_sound = kSpeedOfSound;
  std::vector<Vec3> mic_positions;
  std::vector<SceneSource> sources;

  void validate() const;
  ArrayGeometry geometry() const;
  SourceSet source_set() const;
  std::size_t num_frames() const;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct SceneAudio {
  AudioBuffer mixture;               // sum of images plus noise
  std::vector<AudioBuffer> images;   // per source, as seen by every mic
  AudioBuffer noise;
  std::vector<std::vector<double>> clean;  // per source, undelayed
};

// 64-tap Kaiser-windowed sinc: out[n] ~ in(n - delay).
std::vector<double> fractional_delay(std::span<const double> in, double delay);

std::vector<double> harmonic_signal(const SceneSource& source, std::size_t frames,
                                    int rate, std::uint64_t seed);
std::vector<double> modulated_noise_signal(const SceneSource& source,
                                           std::size_t frames, int rate,
                                           std::uint64_t seed);

SceneAudio synthesize(const SceneSpec& spec);

// Eight irregularly placed microphones inside a 22 x 17 x 47 cm box.
std::vector<Vec3> fig4_microphones();
// Three sources at 2 m: centre and +-theta.
SceneSpec fig4_preset(int theta_deg, double duration_s = 8.0, std::uint64_t seed = 1);
std::vector<std::string> preset_names();
// Unknown names raise kInvalidConfig listing the alternatives.
SceneSpec preset(const std::string& name);

std::string scene_to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const std::string& text);
SceneSpec load_scene_file(const std::filesystem::path& path);

// mixture.wav, ref_<id>.wav (multichannel image), noise.wav, scene.json.
void write_scene(const std::filesystem::path& dir, const SceneSpec& spec,
                 const SceneAudio& audio);
// Reads back ref_<id>.wav and noise.wav for each source id.
struct SceneReferences {
  std::vector<std::string> ids;
  std::vector<AudioBuffer> images;
  AudioBuffer noise;
};
SceneReferences read_scene_references(const std::filesystem::path& dir,
                                      const std::vector<std::string>& ids);

}  // namespace gssfront
