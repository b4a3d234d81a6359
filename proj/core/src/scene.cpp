// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "gssfront/scene.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gssfront/error.hpp"
#include "gssfront/wav.hpp"

namespace gssfront {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kDelayHalfTaps = 32;  // taps at offsets -31..32
constexpr double kDelayBeta = 8.0;
constexpr double kBandLow = 300.0;
constexpr double kBandHigh = 7000.0;

double deg2rad(double d) { return d * kPi / 180.0; }

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

// Seed streams per role so adding a source does not reshuffle the others.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Syllable-like envelope: raised-cosine bumps separated by short gaps and
// occasional pauses.
std::vector<double> syllabic_envelope(std::size_t frames, int rate, std::mt19937_64& rng) {
  std::vector<double> env(frames, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double fs = rate;
  double t = 0.0;
  const double total = static_cast<double>(frames) / fs;
  while (t < total) {
    if (u(rng) < 0.15) {
      t += 0.25 + 0.25 * u(rng);
      continue;
    }
    const double len = 0.12 + 0.18 * u(rng);
    const double peak = 0.6 + 0.4 * u(rng);
    const auto a = static_cast<std::size_t>(t * fs);
    const auto n = static_cast<std::size_t>(len * fs);
    for (std::size_t i = 0; i < n && a + i < frames; ++i) {
      const double ph = static_cast<double>(i) / static_cast<double>(n);
      env[a + i] = peak * (0.5 - 0.5 * std::cos(2.0 * kPi * ph));
    }
    t += len + 0.03 + 0.09 * u(rng);
  }
  return env;
}

std::vector<double> bandpass_taps(double lo, double hi, int rate, int half) {
  std::vector<double> h(2 * half + 1);
  const double f1 = lo / rate;
  const double f2 = hi / rate;
  const double i0b = std::cyl_bessel_i(0.0, kDelayBeta);
  for (int n = -half; n <= half; ++n) {
    const double r = static_cast<double>(n) / half;
    const double w = std::cyl_bessel_i(0.0, kDelayBeta * std::sqrt(1.0 - r * r)) / i0b;
    h[n + half] = w * (2.0 * f2 * sinc(2.0 * f2 * n) - 2.0 * f1 * sinc(2.0 * f1 * n));
  }
  return h;
}

std::vector<double> convolve_same(std::span<const double> x, std::span<const double> h) {
  const auto half = static_cast<std::ptrdiff_t>(h.size() / 2);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) acc += h[static_cast<std::size_t>(i - j + half)] * x[j];
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

}  // namespace

Source SceneSource::steering_source() const {
  return Source{id, deg2rad(azimuth_deg), deg2rad(elevation_deg)};
}

void SceneSpec::validate() const {
  if (!is_supported_rate(rate)) fail(ErrorKind::kInvalidConfig, "unsupported scene rate");
  if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) {
    fail(ErrorKind::kInvalidConfig, "scene duration must be >= 0 seconds");
  }
  if (!(speed_of_sound > 0.0)) fail(ErrorKind::kInvalidConfig, "speed of sound must be positive");
  if (mic_positions.size() < 2) fail(ErrorKind::kInvalidConfig, "scene needs >= 2 microphones");
  if (sources.size() > mic_positions.size()) {
    fail(ErrorKind::kOverDetermined,
         std::to_string(sources.size()) + " sources exceed " +
             std::to_string(mic_positions.size()) + " microphones");
  }
  for (const auto& s : sources) {
    if (s.id.empty()) fail(ErrorKind::kInvalidConfig, "source id must not be empty");
    if (!(s.distance_m >= 0.5)) {
      fail(ErrorKind::kInvalidConfig, "source '" + s.id + "' closer than 0.5 m breaks far field");
    }
    if (!(s.onset_s >= 0.0 && s.onset_s <= duration_s)) {
      fail(ErrorKind::kInvalidConfig, "source '" + s.id + "' onset outside the scene");
    }
    if (s.end_s && !(*s.end_s >= s.onset_s)) {
      fail(ErrorKind::kInvalidConfig, "source '" + s.id + "' ends before its onset");
    }
    if (s.kind == SignalKind::kHarmonic && !(s.pitch_hz > 0.0)) {
      fail(ErrorKind::kInvalidConfig, "source '" + s.id + "' needs a positive pitch");
    }
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (sources[i].id == sources[j].id) {
        fail(ErrorKind::kInvalidConfig, "duplicate source id '" + sources[i].id + "'");
      }
    }
  }
}

ArrayGeometry SceneSpec::geometry() const {
  return ArrayGeometry(mic_positions, speed_of_sound, rate);
}

SourceSet SceneSpec::source_set() const {
  SourceSet set;
  for (const auto& s : sources) set.add(s.steering_source());
  return set;
}

std::size_t SceneSpec::num_frames() const {
  return static_cast<std::size_t>(std::llround(duration_s * rate));
}

std::vector<double> fractional_delay(std::span<const double> in, double delay) {
  const double fl = std::floor(delay);
  const double frac = delay - fl;
  const auto shift = static_cast<std::ptrdiff_t>(fl);
  std::vector<double> h;
  std::vector<std::ptrdiff_t> offs;
  const double i0b = std::cyl_bessel_i(0.0, kDelayBeta);
  for (int k = -kDelayHalfTaps + 1; k <= kDelayHalfTaps; ++k) {
    const double u = k - frac;
    const double r = u / kDelayHalfTaps;
    const double w = std::abs(r) >= 1.0
                         ? 0.0
                         : std::cyl_bessel_i(0.0, kDelayBeta * std::sqrt(1.0 - r * r)) / i0b;
    h.push_back(sinc(u) * w);
    offs.push_back(k);
  }
  const auto n = static_cast<std::ptrdiff_t>(in.size());
  std::vector<double> out(in.size(), 0.0);
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const std::ptrdiff_t src = t - shift - offs[i];
      if (src >= 0 && src < n) acc += h[i] * in[static_cast<std::size_t>(src)];
    }
    out[static_cast<std::size_t>(t)] = acc;
  }
  return out;
}

std::vector<double> harmonic_signal(const SceneSource& source, std::size_t frames,
                                    int rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double fs = rate;
  const double max_f0 = source.pitch_hz * std::pow(2.0, 2.5 / 12.0);
  const auto harmonics = static_cast<std::size_t>(std::max(1.0, std::floor(kBandHigh / max_f0)));
  std::vector<double> phase0(harmonics);
  for (double& p : phase0) p = 2.0 * kPi * u(rng);
  const double drift_rate = 0.2 + 0.3 * u(rng);
  const double drift_phase = 2.0 * kPi * u(rng);
  const double vib_phase = 2.0 * kPi * u(rng);
  const auto env = syllabic_envelope(frames, rate, rng);

  constexpr std::size_t kBlock = 32;
  std::vector<double> amp(harmonics);
  std::vector<double> out(frames, 0.0);
  double phi = 0.0;
  for (std::size_t b = 0; b < frames; b += kBlock) {
    const double t = static_cast<double>(b) / fs;
    const double cents = 2.0 * std::sin(2.0 * kPi * drift_rate * t + drift_phase) +
                         0.3 * std::sin(2.0 * kPi * 5.0 * t + vib_phase);
    const double f0 = source.pitch_hz * std::pow(2.0, cents / 12.0);
    for (std::size_t h = 0; h < harmonics; ++h) {
      const double f = f0 * static_cast<double>(h + 1);
      double a = 1.0 / std::sqrt(static_cast<double>(h + 1));
      if (!source.formants_hz.empty()) {
        double shape = 0.05;
        for (double fr : source.formants_hz) {
          const double bw = 90.0 + 0.06 * fr;
          const double e = (f - fr) / bw;
          shape += std::exp(-0.5 * e * e);
        }
        a *= shape;
      }
      amp[h] = f < kBandHigh ? a : 0.0;
    }
    const double dphi = 2.0 * kPi * f0 / fs;
    const std::size_t end = std::min(frames, b + kBlock);
    for (std::size_t n = b; n < end; ++n) {
      if (env[n] > 0.0) {
        double s = 0.0;
        for (std::size_t h = 0; h < harmonics; ++h) {
          if (amp[h] != 0.0) s += amp[h] * std::sin(static_cast<double>(h + 1) * phi + phase0[h]);
        }
        out[n] = env[n] * s;
      }
      phi += dphi;
      if (phi > 2.0 * kPi) phi -= 2.0 * kPi;
    }
  }
  return out;
}

std::vector<double> modulated_noise_signal(const SceneSource& source,
                                           std::size_t frames, int rate,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> white(frames);
  for (double& v : white) v = g(rng);
  const double hi = std::min(kBandHigh, 0.45 * rate);
  auto band = convolve_same(white, bandpass_taps(kBandLow, hi, rate, 128));
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  const double ph = u(rng);
  for (std::size_t n = 0; n < frames; ++n) {
    const double t = static_cast<double>(n) / rate;
    band[n] *= 1.0 + 0.9 * std::sin(2.0 * kPi * source.modulation_hz * t + ph);
  }
  return band;
}

SceneAudio synthesize(const SceneSpec& spec) {
  spec.validate();
  const ArrayGeometry geometry = spec.geometry();
  const std::size_t frames = spec.num_frames();
  const std::size_t mics = spec.mic_positions.size();
  SceneAudio out;

  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    const auto& src = spec.sources[i];
    std::vector<double> s;
    if (!src.clean_wav.empty()) {
      const AudioBuffer wav = read_wav(src.clean_wav);
      if (wav.rate() != spec.rate || wav.channels() != 1) {
        fail(ErrorKind::kInvalidInput, "clean reference '" + src.clean_wav +
                                           "' must be mono at the scene rate");
      }
      s.assign(frames, 0.0);
      const auto ch = wav.channel(0);
      std::copy_n(ch.begin(), std::min(frames, ch.size()), s.begin());
    } else if (src.kind == SignalKind::kHarmonic) {
      s = harmonic_signal(src, frames, spec.rate, mix_seed(spec.seed, 2 * i));
    } else {
      s = modulated_noise_signal(src, frames, spec.rate, mix_seed(spec.seed, 2 * i));
    }
    const auto on = std::min(frames, static_cast<std::size_t>(std::llround(src.onset_s * spec.rate)));
    const auto off = src.end_s
                         ? std::min(frames, static_cast<std::size_t>(std::llround(*src.end_s * spec.rate)))
                         : frames;
    std::fill(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(on), 0.0);
    std::fill(s.begin() + static_cast<std::ptrdiff_t>(std::max(on, off)), s.end(), 0.0);
    const double level = rms(std::span<const double>(s).subspan(on, off > on ? off - on : 0));
    if (level > 0.0) {
      const double scale = std::pow(10.0, src.gain_dbfs / 20.0) / level;
      for (double& v : s) v *= scale;
    }

    std::vector<std::vector<double>> image(mics);
    const Vec3 u = direction_from_angles(deg2rad(src.azimuth_deg), deg2rad(src.elevation_deg));
    for (std::size_t m = 0; m < mics; ++m) {
      image[m] = fractional_delay(s, far_field_delay(geometry, m, u));
    }
    out.images.emplace_back(spec.rate, std::move(image));
    out.clean.push_back(std::move(s));
  }

  std::vector<std::vector<double>> noise(mics, std::vector<double>(frames, 0.0));
  if (spec.noise_dbfs) {
    const double sigma = std::pow(10.0, *spec.noise_dbfs / 20.0);
    for (std::size_t m = 0; m < mics; ++m) {
      std::mt19937_64 rng(mix_seed(spec.seed, 1000 + m));
      std::normal_distribution<double> g(0.0, sigma);
      for (double& v : noise[m]) v = g(rng);
    }
  }
  out.noise = AudioBuffer(spec.rate, noise);

  // Mixture summed in a fixed order: images by source index, then noise.
  std::vector<std::vector<double>> mix(mics, std::vector<double>(frames, 0.0));
  for (std::size_t m = 0; m < mics; ++m) {
    for (std::size_t n = 0; n < frames; ++n) {
      double acc = 0.0;
      for (const auto& img : out.images) acc += img.channel(m)[n];
      mix[m][n] = acc + noise[m][n];
    }
  }
  out.mixture = AudioBuffer(spec.rate, std::move(mix));
  return out;
}

std::vector<Vec3> fig4_microphones() {
  // Box spans x in [-0.11, 0.11], y in [-0.085, 0.085], z in [-0.235, 0.235].
  return {
      {0.11, 0.07, 0.20},     {0.09, -0.085, 0.23},   {-0.10, 0.08, 0.12},
      {-0.11, -0.06, 0.235},  {0.11, 0.0, -0.10},     {0.02, 0.085, -0.20},
      {-0.05, -0.085, -0.235}, {-0.11, 0.03, -0.05},
  };
}

SceneSpec fig4_preset(int theta_deg, double duration_s, std::uint64_t seed) {
  SceneSpec spec;
  spec.name = "fig4-" + std::to_string(theta_deg) + "deg";
  spec.duration_s = duration_s;
  spec.seed = seed;
  spec.mic_positions = fig4_microphones();
  const double th = theta_deg;
  // Staggered onsets so the separator sees each source enter.
  const struct { const char* id; double az; double onset; double pitch; } layout[] = {
      {"center", 0.0, 0.0, 120.0}, {"left", th, 0.2, 185.0}, {"right", -th, 0.4, 150.0}};
  for (const auto& l : layout) {
    SceneSource s;
    s.id = l.id;
    s.azimuth_deg = l.az;
    s.onset_s = l.onset;
    s.pitch_hz = l.pitch;
    spec.sources.push_back(s);
  }
  return spec;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (int th = 10; th <= 90; th += 10) names.push_back("fig4-" + std::to_string(th) + "deg");
  return names;
}

SceneSpec preset(const std::string& name) {
  for (int th = 10; th <= 90; th += 10) {
    if (name == "fig4-" + std::to_string(th) + "deg") return fig4_preset(th);
  }
  std::string list;
  for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  fail(ErrorKind::kInvalidConfig, "unknown preset '" + name + "'; available: " + list);
}

namespace {

using nlohmann::json;

const char* kind_name(SignalKind k) {
  return k == SignalKind::kHarmonic ? "harmonic" : "modulated_noise";
}

SignalKind kind_from(const std::string& s) {
  if (s == "harmonic") return SignalKind::kHarmonic;
  if (s == "modulated_noise") return SignalKind::kModulatedNoise;
  fail(ErrorKind::kConfigParse, "unknown signal kind '" + s + "'");
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return it.key() == k; }) == known.end()) {
      fail(ErrorKind::kConfigParse, "unknown key '" + it.key() + "' in " + where);
    }
  }
}

}  // namespace

std::string scene_to_json(const SceneSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["rate_hz"] = spec.rate;
  j["duration_s"] = spec.duration_s;
  j["seed"] = spec.seed;
  j["noise_dbfs"] = spec.noise_dbfs ? json(*spec.noise_dbfs) : json(nullptr);
  j["speed_of_sound_mps"] = spec.speed_of_sound;
  j["mics_m"] = json::array();
  for (const auto& p : spec.mic_positions) j["mics_m"].push_back({p.x, p.y, p.z});
  j["sources"] = json::array();
  for (const auto& s : spec.sources) {
    json js;
    js["id"] = s.id;
    js["azimuth_deg"] = s.azimuth_deg;
    js["elevation_deg"] = s.elevation_deg;
    js["distance_m"] = s.distance_m;
    js["signal"] = kind_name(s.kind);
    js["gain_dbfs"] = s.gain_dbfs;
    js["onset_s"] = s.onset_s;
    js["end_s"] = s.end_s ? json(*s.end_s) : json(nullptr);
    js["pitch_hz"] = s.pitch_hz;
    js["formants_hz"] = s.formants_hz;
    js["modulation_hz"] = s.modulation_hz;
    js["clean_wav"] = s.clean_wav;
    j["sources"].push_back(js);
  }
  return j.dump(2) + "\n";
}

SceneSpec scene_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfigParse, std::string("scene file: ") + e.what());
  }
  SceneSpec spec;
  try {
    reject_unknown(j, {"name", "rate_hz", "duration_s", "seed", "noise_dbfs",
                       "speed_of_sound_mps", "mics_m", "sources"},
                   "scene");
    spec.name = j.value("name", spec.name);
    spec.rate = j.value("rate_hz", spec.rate);
    spec.duration_s = j.value("duration_s", spec.duration_s);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("noise_dbfs")) {
      spec.noise_dbfs = j["noise_dbfs"].is_null()
                            ? std::nullopt
                            : std::optional<double>(j["noise_dbfs"].get<double>());
    }
    spec.speed_of_sound = j.value("speed_of_sound_mps", spec.speed_of_sound);
    for (const auto& p : j.at("mics_m")) {
      if (p.size() != 3) fail(ErrorKind::kConfigParse, "microphone position needs 3 values");
      spec.mic_positions.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
    for (const auto& js : j.value("sources", json::array())) {
      reject_unknown(js, {"id", "azimuth_deg", "elevation_deg", "distance_m", "signal",
                          "gain_dbfs", "onset_s", "end_s", "pitch_hz", "formants_hz",
                          "modulation_hz", "clean_wav"},
                     "scene source");
      SceneSource s;
      s.id = js.at("id").get<std::string>();
      s.azimuth_deg = js.value("azimuth_deg", s.azimuth_deg);
      s.elevation_deg = js.value("elevation_deg", s.elevation_deg);
      s.distance_m = js.value("distance_m", s.distance_m);
      s.kind = kind_from(js.value("signal", std::string("harmonic")));
      s.gain_dbfs = js.value("gain_dbfs", s.gain_dbfs);
      s.onset_s = js.value("onset_s", s.onset_s);
      if (js.contains("end_s") && !js["end_s"].is_null()) s.end_s = js["end_s"].get<double>();
      s.pitch_hz = js.value("pitch_hz", s.pitch_hz);
      s.formants_hz = js.value("formants_hz", s.formants_hz);
      s.modulation_hz = js.value("modulation_hz", s.modulation_hz);
      s.clean_wav = js.value("clean_wav", s.clean_wav);
      spec.sources.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfigParse, std::string("scene file: ") + e.what());
  }
  spec.validate();
  return spec;
}

SceneSpec load_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open scene file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return scene_from_json(ss.str());
}

void write_scene(const std::filesystem::path& dir, const SceneSpec& spec,
                 const SceneAudio& audio) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create '" + dir.string() + "': " + ec.message());
  write_wav(dir / "mixture.wav", audio.mixture);
  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    write_wav(dir / ("ref_" + spec.sources[i].id + ".wav"), audio.images.at(i));
  }
  write_wav(dir / "noise.wav", audio.noise);
  std::ofstream js(dir / "scene.json");
  if (!js) fail(ErrorKind::kIo, "cannot write scene.json");
  js << scene_to_json(spec);
}

SceneReferences read_scene_references(const std::filesystem::path& dir,
                                      const std::vector<std::string>& ids) {
  SceneReferences refs;
  refs.ids = ids;
  for (const auto& id : ids) refs.images.push_back(read_wav(dir / ("ref_" + id + ".wav")));
  refs.noise = read_wav(dir / "noise.wav");
  return refs;
}

}  // namespace gssfront
