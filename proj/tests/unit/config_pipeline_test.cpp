// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "gssfront/config.hpp"
#include "gssfront/error.hpp"
#include "gssfront/feature_io.hpp"
#include "gssfront/pipeline.hpp"
#include "gssfront/scene.hpp"
#include "gssfront/wav.hpp"
#include "support/generators.hpp"

using namespace gssfront;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::kIo;
}

PipelineConfig preset_config(int theta) {
  PipelineConfig c;
  apply_preset(c, "fig4-" + std::to_string(theta) + "deg");
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

double rms_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(e / static_cast<double>(a.size()));
}

}  // namespace

TEST_CASE("config JSON round trip") {
  auto c = preset_config(70);
  c.gss.mu = 0.02;
  c.postfilter.leakage = 0.1;
  c.postfilter.mcra.window_frames = 99;
  c.features.cms = false;
  c.feature_format = FileFormat::kBoth;
  c.mask.threshold = 0.4;
  c.threaded = true;
  c.output_dir = "elsewhere";
  const auto back = config_from_json(config_to_json(c));
  CHECK(back == c);
  CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("config parse and range errors") {
  const auto base = nlohmann::json::parse(config_to_json(preset_config(30)));
  auto with = [&](const std::string& section, const std::string& key, const nlohmann::json& v) {
    auto j = base;
    j[section][key] = v;
    return j.dump();
  };
  CHECK(kind_of([&] { config_from_json("{\"stft\": "); }) == ErrorKind::kConfigParse);
  CHECK(kind_of([&] { config_from_json(with("stft", "hop", 3)); }) == ErrorKind::kConfigParse);
  CHECK(kind_of([&] { config_from_json("{\"colour\": 1}"); }) == ErrorKind::kConfigParse);
  CHECK(kind_of([&] { config_from_json(with("separation", "mu", "fast")); }) ==
        ErrorKind::kConfigParse);
  CHECK(kind_of([&] { config_from_json(with("postfilter", "eta", 1.5)); }) ==
        ErrorKind::kInvalidConfig);
  CHECK(kind_of([&] { config_from_json(with("stft", "fft_size", 1023)); }) ==
        ErrorKind::kInvalidConfig);
  CHECK(kind_of([&] { config_from_json(with("mask", "threshold", -1)); }) ==
        ErrorKind::kInvalidConfig);
  // range checks can be deferred until overrides are in
  CHECK_NOTHROW(config_from_json(with("postfilter", "eta", 1.5), false));

  auto c = preset_config(30);
  c.mics.resize(2);
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::kOverDetermined);
  c = preset_config(30);
  c.postfilter_enabled = false;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::kInvalidConfig);
}

TEST_CASE("a lone source gets delay-and-sum out of GSS") {
  const SceneSpec spec = [] {
    auto s = fig4_preset(90, 2.0);
    s.sources.resize(1);
    return s;
  }();
  const auto audio = synthesize(spec);
  auto c = preset_config(90);
  c.sources.resize(1);
  c.postfilter_enabled = c.features_enabled = c.mask_enabled = false;
  const auto gss = process_mixture(c, audio.mixture);
  c.mode = SeparationMode::kDelayAndSum;
  const auto ds = process_mixture(c, audio.mixture);
  CHECK(rms_diff(gss.gss_output[0], ds.gss_output[0]) < 1e-6);
}

TEST_CASE("inline and threaded runs are bit-identical") {
  const auto spec = fig4_preset(40, 1.5);
  const auto audio = synthesize(spec);
  const MixtureComponents comps{audio.images, audio.noise};
  ProcessOptions opt;
  opt.components = &comps;
  auto c = preset_config(40);
  const auto a = process_mixture(c, audio.mixture, opt);
  c.threaded = true;
  c.queue_capacity = 2;
  const auto b = process_mixture(c, audio.mixture, opt);
  CHECK(a.separated == b.separated);
  CHECK(a.gss_output == b.gss_output);
  CHECK(a.postfiltered == b.postfiltered);
  CHECK(a.shadows == b.shadows);
  REQUIRE(a.features.size() == b.features.size());
  for (std::size_t m = 0; m < a.features.size(); ++m) {
    CHECK(encode_features(a.features[m]) == encode_features(b.features[m]));
    CHECK(encode_mask(a.masks[m]) == encode_mask(b.masks[m]));
  }
  CHECK(a.mask_frame_map == b.mask_frame_map);
}

TEST_CASE("stage ordering at a wide spread") {
  const auto audio = synthesize(fig4_preset(90, 4.0));
  const MixtureComponents comps{audio.images, audio.noise};
  ProcessOptions opt;
  opt.components = &comps;
  const auto r = process_mixture(preset_config(90), audio.mixture, opt);
  REQUIRE(r.quality);
  CHECK(r.stage_names == std::vector<std::string>{"delay-and-sum", "gss", "gss+pf"});
  const auto* ds = r.quality->find("delay-and-sum");
  const auto* gss = r.quality->find("gss");
  const auto* pf = r.quality->find("gss+pf");
  REQUIRE((ds && gss && pf));
  for (std::size_t m = 0; m < 3; ++m) {
    CAPTURE(m);
    CHECK(gss->sources[m].output_sir_db > ds->sources[m].output_sir_db);
    CHECK(pf->sources[m].output_sir_db > gss->sources[m].output_sir_db);
    CHECK(ds->sources[m].output_sir_db > ds->sources[m].input_sir_db);
  }
  CHECK(r.gain_incidents == 0);
  CHECK(r.rejected_updates == 0);
}

TEST_CASE("shadows add up to the stage outputs") {
  const auto audio = synthesize(fig4_preset(20, 1.0));
  const MixtureComponents comps{audio.images, audio.noise};
  ProcessOptions opt;
  opt.components = &comps;
  const auto r = process_mixture(preset_config(20), audio.mixture, opt);
  const std::vector<const std::vector<std::vector<double>>*> outs{&r.delay_and_sum, &r.gss_output};
  for (std::size_t s = 0; s < outs.size(); ++s) {
    for (std::size_t m = 0; m < 3; ++m) {
      double worst = 0.0, peak = 0.0;
      for (std::size_t t = 0; t < r.input_frames; ++t) {
        double acc = 0.0;
        for (const auto& part : r.shadows[s][m]) acc += part[t];
        worst = std::max(worst, std::abs(acc - (*outs[s])[m][t]));
        peak = std::max(peak, std::abs((*outs[s])[m][t]));
      }
      CHECK(worst <= 1e-9 * peak);
    }
  }
}

TEST_CASE("run_pipeline writes deterministic outputs") {
  const fs::path root = fs::temp_directory_path() / "gssfront_pipeline_test";
  fs::remove_all(root);
  const auto spec = fig4_preset(60, 1.0);
  write_scene(root / "scene", spec, synthesize(spec));

  auto c = preset_config(60);
  c.input_wav = (root / "scene" / "mixture.wav").string();
  c.reference_dir = (root / "scene").string();
  c.feature_format = FileFormat::kBoth;
  c.dump_diagnostics = true;
  c.output_dir = (root / "a").string();
  run_pipeline(c);
  c.output_dir = (root / "b").string();
  c.threaded = true;
  run_pipeline(c);

  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "a");
    if (rel == "effective_config.json") continue;  // output_dir and threaded differ
    CAPTURE(rel.string());
    CHECK(slurp(e.path()) == slurp(root / "b" / rel));
    ++files;
  }
  // 3 wav, 3x2 features, 3x2 masks, quality, 3 diagnostics
  CHECK(files == 3 + 6 + 6 + 1 + 3);
  const auto eff = config_from_json(slurp(root / "a" / "effective_config.json"));
  CHECK(eff.output_dir == (root / "a").string());
  const auto wav = read_wav(root / "a" / "separated_left.wav");
  CHECK(wav.rate() == 48000);
  CHECK(wav.frames() == 48000);
  CHECK(slurp(root / "a" / "diagnostics" / "postfilter.csv")
            .starts_with("frame,source,bin,lambda_stat,lambda_leak,xi,p,gain\n"));
  fs::remove_all(root);
}

TEST_CASE("bad inputs fail before any output exists") {
  const fs::path root = fs::temp_directory_path() / "gssfront_pipeline_missing";
  fs::remove_all(root);
  auto c = preset_config(30);
  c.input_wav = (root / "nothing.wav").string();
  c.output_dir = (root / "out").string();
  CHECK(kind_of([&] { run_pipeline(c); }) == ErrorKind::kIo);
  CHECK_FALSE(fs::exists(root / "out"));

  // wrong channel count
  fs::create_directories(root);
  write_wav(root / "two.wav", AudioBuffer(48000, {std::vector<double>(48000), std::vector<double>(48000)}));
  c.input_wav = (root / "two.wav").string();
  CHECK(kind_of([&] { run_pipeline(c); }) == ErrorKind::kStream);
  CHECK_FALSE(fs::exists(root / "out"));

  // references missing
  const auto spec = fig4_preset(30, 0.5);
  write_scene(root / "scene", spec, synthesize(spec));
  fs::remove(root / "scene" / "ref_left.wav");
  c.input_wav = (root / "scene" / "mixture.wav").string();
  c.reference_dir = (root / "scene").string();
  CHECK(kind_of([&] { run_pipeline(c); }) == ErrorKind::kIo);
  CHECK_FALSE(fs::exists(root / "out"));
  fs::remove_all(root);
}

TEST_CASE("run header lists the effective parameters") {
  std::ostringstream os;
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(os);
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(std::make_shared<spdlog::logger>("capture", sink));
  auto c = preset_config(50);
  c.gss.mu = 0.005;
  log_run_header(c);
  spdlog::set_default_logger(previous);
  const auto text = os.str();
  CHECK(text.find("8 mics, 3 sources, K=1024 shift=512") != std::string::npos);
  CHECK(text.find("mu=0.005") != std::string::npos);
}

TEST_CASE("bounded queue") {
  BoundedQueue<int> q(2);
  CHECK(q.push(1));
  CHECK(q.push(2));
  std::thread producer([&] {
    for (int i = 3; i <= 100; ++i) q.push(i);
    q.close();
  });
  std::vector<int> got;
  while (auto v = q.pop()) got.push_back(*v);
  producer.join();
  REQUIRE(got.size() == 100);
  for (int i = 0; i < 100; ++i) CHECK(got[static_cast<std::size_t>(i)] == i + 1);
  CHECK_FALSE(q.push(7));
  CHECK_FALSE(q.pop());
  CHECK(BoundedQueue<int>(0).capacity() == 1);
}
