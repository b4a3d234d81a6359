// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gssfront/error.hpp"
#include "gssfront/scene.hpp"

namespace gssfront {

using nlohmann::json;

Source SourceDirection::to_source() const {
  constexpr double r = std::numbers::pi / 180.0;
  return Source{id, azimuth_deg * r, elevation_deg * r};
}

std::string to_string(SeparationMode mode) {
  return mode == SeparationMode::kGss ? "gss" : "delay_and_sum";
}

std::string to_string(FileFormat format) {
  switch (format) {
    case FileFormat::kBinary: return "binary";
    case FileFormat::kCsv: return "csv";
    case FileFormat::kBoth: return "both";
  }
  return "binary";
}

namespace {

std::string window_name(Window w) {
  switch (w) {
    case Window::kSqrtHann: return "sqrt_hann";
    case Window::kHann: return "hann";
    case Window::kHamming: return "hamming";
    case Window::kRectangular: return "rectangular";
  }
  return "sqrt_hann";
}

Window window_from(const std::string& s) {
  if (s == "sqrt_hann") return Window::kSqrtHann;
  if (s == "hann") return Window::kHann;
  if (s == "hamming") return Window::kHamming;
  if (s == "rectangular") return Window::kRectangular;
  fail(ErrorKind::kConfigParse, "unknown window '" + s + "'");
}

// Reads keys from one JSON object and rejects any it was not asked about.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorKind::kConfigParse, where_ + " must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        fail(ErrorKind::kConfigParse,
             "unknown key '" + it.key() + "' in " + where_);
      }
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(ErrorKind::kConfigParse, where_ + "." + key + ": " + e.what());
    }
  }
  bool has(const char* key) const { return j_.contains(key); }
  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

void PipelineConfig::validate() const {
  stft.validate();
  gss.validate();
  postfilter.validate();
  features.validate();
  mask.validate();
  if (mics.size() < 2) fail(ErrorKind::kInvalidConfig, "geometry needs >= 2 microphones");
  if (sources.empty()) fail(ErrorKind::kInvalidConfig, "at least one source direction is required");
  if (sources.size() > mics.size()) {
    fail(ErrorKind::kOverDetermined, std::to_string(sources.size()) + " sources exceed " +
                                         std::to_string(mics.size()) + " microphones");
  }
  if (!(speed_of_sound > 0.0)) fail(ErrorKind::kInvalidConfig, "speed of sound must be positive");
  if (mask_enabled && !postfilter_enabled) {
    fail(ErrorKind::kInvalidConfig, "the mask needs the post-filter stage");
  }
  if (mask_enabled && !features_enabled) {
    fail(ErrorKind::kInvalidConfig, "the mask is aligned to feature frames; enable features");
  }
  if (queue_capacity == 0) fail(ErrorKind::kInvalidConfig, "queue capacity must be >= 1");
  if (mask.threshold < 0.0) fail(ErrorKind::kInvalidConfig, "mask threshold must be >= 0");
  source_set();  // duplicate ids
}

ArrayGeometry PipelineConfig::geometry() const {
  return ArrayGeometry(mics, speed_of_sound, kSeparationRate);
}

SourceSet PipelineConfig::source_set() const {
  SourceSet set;
  for (const auto& s : sources) {
    try {
      set.add(s.to_source());
    } catch (const Error& e) {
      fail(ErrorKind::kInvalidConfig, e.what());
    }
  }
  return set;
}

void apply_preset(PipelineConfig& config, const std::string& name) {
  const SceneSpec spec = preset(name);
  config.scene_preset = name;
  config.mics = spec.mic_positions;
  config.speed_of_sound = spec.speed_of_sound;
  config.sources.clear();
  for (const auto& s : spec.sources) {
    config.sources.push_back({s.id, s.azimuth_deg, s.elevation_deg});
  }
}

PipelineConfig config_from_json(const std::string& text, bool validate) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfigParse, std::string("config: ") + e.what());
  }
  PipelineConfig c;
  {
    Section top(root, "config");
    top.get("scene_preset", c.scene_preset);
    if (!c.scene_preset.empty()) apply_preset(c, c.scene_preset);

    if (const json* g = top.child("geometry")) {
      Section s(*g, "geometry");
      if (const json* mics = s.child("mics_m")) {
        c.mics.clear();
        try {
          for (const auto& p : *mics) {
            if (p.size() != 3) fail(ErrorKind::kConfigParse, "microphone position needs 3 values");
            c.mics.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
          }
        } catch (const json::exception& e) {
          fail(ErrorKind::kConfigParse, std::string("geometry.mics_m: ") + e.what());
        }
      }
      s.get("speed_of_sound_mps", c.speed_of_sound);
    }
    if (const json* src = top.child("sources")) {
      if (!src->is_array()) fail(ErrorKind::kConfigParse, "sources must be an array");
      c.sources.clear();
      for (const auto& js : *src) {
        Section s(js, "source");
        SourceDirection d;
        s.get("id", d.id);
        s.get("azimuth_deg", d.azimuth_deg);
        s.get("elevation_deg", d.elevation_deg);
        if (d.id.empty()) fail(ErrorKind::kConfigParse, "source needs an id");
        c.sources.push_back(d);
      }
    }
    if (const json* st = top.child("stft")) {
      Section s(*st, "stft");
      s.get("fft_size", c.stft.fft_size);
      s.get("shift", c.stft.shift);
      std::string w = window_name(c.stft.window);
      s.get("window", w);
      c.stft.window = window_from(w);
    }
    if (const json* sep = top.child("separation")) {
      Section s(*sep, "separation");
      std::string mode = to_string(c.mode);
      s.get("mode", mode);
      if (mode == "gss") {
        c.mode = SeparationMode::kGss;
      } else if (mode == "delay_and_sum") {
        c.mode = SeparationMode::kDelayAndSum;
      } else {
        fail(ErrorKind::kConfigParse, "separation.mode must be gss or delay_and_sum");
      }
      s.get("mu", c.gss.mu);
      s.get("energy_floor", c.gss.energy_floor);
    }
    if (const json* pf = top.child("postfilter")) {
      Section s(*pf, "postfilter");
      auto& o = c.postfilter;
      s.get("enabled", c.postfilter_enabled);
      s.get("alpha_s", o.spectrum_smoothing);
      s.get("eta", o.leakage);
      s.get("alpha", o.alpha);
      s.get("alpha_p", o.dd_weight);
      s.get("upsilon_clamp", o.upsilon_clamp);
      s.get("gain_min", o.gain_min);
      s.get("gain_max", o.gain_max);
      s.get("noise_floor", o.noise_floor);
      if (const json* m = s.child("mcra")) {
        Section ms(*m, "postfilter.mcra");
        ms.get("alpha_d", o.mcra.noise_smoothing);
        ms.get("power_smoothing", o.mcra.power_smoothing);
        ms.get("window_frames", o.mcra.window_frames);
        ms.get("presence_smoothing", o.mcra.presence_smoothing);
        ms.get("onset_ratio", o.mcra.onset_ratio);
      }
      if (const json* p = s.child("prior")) {
        Section ps(*p, "postfilter.prior");
        ps.get("smoothing", o.prior_smoothing);
        ps.get("local_half_width", o.local_half_width);
        ps.get("global_half_width", o.global_half_width);
        ps.get("xi_min_db", o.prior_xi_min_db);
        ps.get("xi_max_db", o.prior_xi_max_db);
        ps.get("q_min", o.prior_q_min);
        ps.get("q_max", o.prior_q_max);
      }
    }
    if (const json* f = top.child("features")) {
      Section s(*f, "features");
      auto& o = c.features;
      s.get("enabled", c.features_enabled);
      std::string fmt = to_string(c.feature_format);
      s.get("format", fmt);
      if (fmt == "binary") {
        c.feature_format = FileFormat::kBinary;
      } else if (fmt == "csv") {
        c.feature_format = FileFormat::kCsv;
      } else if (fmt == "both") {
        c.feature_format = FileFormat::kBoth;
      } else {
        fail(ErrorKind::kConfigParse, "features.format must be binary, csv or both");
      }
      s.get("lifter", o.lifter);
      s.get("lifter_keep_first", o.lifter_keep_first);
      s.get("lifter_keep_last", o.lifter_keep_last);
      s.get("cms", o.cms);
      s.get("delta_half_width", o.delta_half_width);
      s.get("log_floor", o.log_floor);
    }
    if (const json* m = top.child("mask")) {
      Section s(*m, "mask");
      s.get("enabled", c.mask_enabled);
      s.get("threshold", c.mask.threshold);
      s.get("input_floor", c.mask.input_floor);
      s.get("delta_half_width", c.mask.delta_half_width);
    }
    if (const json* io = top.child("io")) {
      Section s(*io, "io");
      s.get("input_wav", c.input_wav);
      s.get("output_dir", c.output_dir);
      s.get("reference_dir", c.reference_dir);
    }
    if (const json* rt = top.child("runtime")) {
      Section s(*rt, "runtime");
      s.get("threaded", c.threaded);
      s.get("queue_capacity", c.queue_capacity);
    }
    if (const json* d = top.child("diagnostics")) {
      Section s(*d, "diagnostics");
      s.get("dump", c.dump_diagnostics);
    }
  }
  if (validate) c.validate();
  return c;
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["scene_preset"] = c.scene_preset;
  j["geometry"]["mics_m"] = json::array();
  for (const auto& p : c.mics) j["geometry"]["mics_m"].push_back({p.x, p.y, p.z});
  j["geometry"]["speed_of_sound_mps"] = c.speed_of_sound;
  j["sources"] = json::array();
  for (const auto& s : c.sources) {
    j["sources"].push_back(
        {{"id", s.id}, {"azimuth_deg", s.azimuth_deg}, {"elevation_deg", s.elevation_deg}});
  }
  j["stft"] = {{"fft_size", c.stft.fft_size},
               {"shift", c.stft.shift},
               {"window", window_name(c.stft.window)}};
  j["separation"] = {
      {"mode", to_string(c.mode)}, {"mu", c.gss.mu}, {"energy_floor", c.gss.energy_floor}};
  const auto& o = c.postfilter;
  j["postfilter"] = {{"enabled", c.postfilter_enabled},
                     {"alpha_s", o.spectrum_smoothing},
                     {"eta", o.leakage},
                     {"alpha", o.alpha},
                     {"alpha_p", o.dd_weight},
                     {"upsilon_clamp", o.upsilon_clamp},
                     {"gain_min", o.gain_min},
                     {"gain_max", o.gain_max},
                     {"noise_floor", o.noise_floor}};
  j["postfilter"]["mcra"] = {{"alpha_d", o.mcra.noise_smoothing},
                             {"power_smoothing", o.mcra.power_smoothing},
                             {"window_frames", o.mcra.window_frames},
                             {"presence_smoothing", o.mcra.presence_smoothing},
                             {"onset_ratio", o.mcra.onset_ratio}};
  j["postfilter"]["prior"] = {{"smoothing", o.prior_smoothing},
                              {"local_half_width", o.local_half_width},
                              {"global_half_width", o.global_half_width},
                              {"xi_min_db", o.prior_xi_min_db},
                              {"xi_max_db", o.prior_xi_max_db},
                              {"q_min", o.prior_q_min},
                              {"q_max", o.prior_q_max}};
  const auto& f = c.features;
  j["features"] = {{"enabled", c.features_enabled},
                   {"format", to_string(c.feature_format)},
                   {"lifter", f.lifter},
                   {"lifter_keep_first", f.lifter_keep_first},
                   {"lifter_keep_last", f.lifter_keep_last},
                   {"cms", f.cms},
                   {"delta_half_width", f.delta_half_width},
                   {"log_floor", f.log_floor}};
  j["mask"] = {{"enabled", c.mask_enabled},
               {"threshold", c.mask.threshold},
               {"input_floor", c.mask.input_floor},
               {"delta_half_width", c.mask.delta_half_width}};
  j["io"] = {{"input_wav", c.input_wav},
             {"output_dir", c.output_dir},
             {"reference_dir", c.reference_dir}};
  j["runtime"] = {{"threaded", c.threaded}, {"queue_capacity", c.queue_capacity}};
  j["diagnostics"] = {{"dump", c.dump_diagnostics}};
  return j.dump(2) + "\n";
}

PipelineConfig load_config(const std::filesystem::path& path, bool validate) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), validate);
}

}  // namespace gssfront
