// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "gssfront/config.hpp"
#include "gssfront/error.hpp"
#include "gssfront/feature_io.hpp"
#include "gssfront/features.hpp"
#include "gssfront/mask.hpp"
#include "gssfront/mel.hpp"
#include "gssfront/pipeline.hpp"
#include "gssfront/scene.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace gssfront;
using gssfront::testing::Gen;

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

MaskRow random_row(Gen& g, std::size_t bands, double p = 0.7) {
  MaskRow r;
  r.continuous.resize(bands);
  r.reliable.resize(bands);
  r.delta_reliable.assign(bands, 0);
  for (std::size_t i = 0; i < bands; ++i) {
    r.reliable[i] = g.coin(p) ? 1 : 0;
    r.continuous[i] = r.reliable[i] ? g.uniform(0.26, 1.0) : g.uniform(0.0, 0.25);
  }
  return r;
}

}  // namespace

TEST_CASE("filterbank shape") {
  const MelFilterbank bank;
  REQUIRE(bank.num_filters() == 24);
  REQUIRE(bank.num_bins() == 201);
  for (std::size_t i = 1; i < 24; ++i) {
    CHECK(hz_to_mel(bank.center_hz(i)) > hz_to_mel(bank.center_hz(i - 1)));
  }
  std::vector<double> cover(201, 0.0);
  for (std::size_t i = 0; i < 24; ++i) {
    const auto w = bank.weights(i);
    for (std::size_t k = 0; k < 201; ++k) {
      CHECK(w[k] >= 0.0);
      cover[k] += w[k];
    }
  }
  for (std::size_t k = 1; k < 200; ++k) CHECK(cover[k] > 0.0);
  // equal spacing in mel
  const double step = hz_to_mel(bank.center_hz(1)) - hz_to_mel(bank.center_hz(0));
  for (std::size_t i = 1; i < 24; ++i) {
    CHECK(hz_to_mel(bank.center_hz(i)) - hz_to_mel(bank.center_hz(i - 1)) == doctest::Approx(step));
  }
  CHECK(hz_to_mel(1000.0) == doctest::Approx(2595.0 * std::log10(1.0 + 1000.0 / 700.0)));
  CHECK(mel_to_hz(hz_to_mel(3210.0)) == doctest::Approx(3210.0));
}

TEST_CASE("mel energies of zero, flat and impulse spectra") {
  const MelFilterbank bank;
  for (double e : mel_energies(std::vector<double>(201, 0.0), bank)) CHECK(e == 0.0);
  const auto flat = mel_energies(std::vector<double>(201, 1.0), bank);
  for (std::size_t i = 0; i < 24; ++i) {
    const auto w = bank.weights(i);
    double s = 0.0;
    for (double v : w) s += v;
    CHECK(flat[i] == doctest::Approx(s).epsilon(1e-12));
  }
  for (std::size_t k : {3u, 50u, 120u, 199u}) {
    std::vector<double> p(201, 0.0);
    p[k] = 2.0;
    const auto e = mel_energies(p, bank);
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < 24; ++i) {
      if (e[i] != 0.0) {
        ++nonzero;
        CHECK(e[i] == doctest::Approx(2.0 * bank.weights(i)[k]));
      }
    }
    CHECK(nonzero >= 1);
    CHECK(nonzero <= 2);
  }
}

TEST_CASE("mel energies on the wrong grid is an invalid config") {
  const MelFilterbank bank;
  CHECK(kind_of([&] { mel_energies(std::vector<double>(513, 1.0), bank); }) == ErrorKind::kInvalidConfig);
}

TEST_CASE("DCT then IDCT is the identity") {
  Gen g(1);
  const Dct dct(24);
  for (int t = 0; t < 20; ++t) {
    const auto x = g.signal(24, 3.0);
    const auto y = dct.inverse(dct.forward(x));
    for (std::size_t i = 0; i < 24; ++i) CHECK(std::abs(y[i] - x[i]) < 1e-10);
  }
  FeatureOptions o;
  o.lifter = false;
  o.cms = false;
  const FeatureExtractor fx(o);
  std::vector<std::vector<double>> lm;
  for (int t = 0; t < 5; ++t) lm.push_back(g.signal(24, 3.0));
  const auto back = fx.smooth_and_normalize(lm);
  for (std::size_t t = 0; t < lm.size(); ++t) {
    for (std::size_t i = 0; i < 24; ++i) CHECK(std::abs(back[t][i] - lm[t][i]) < 1e-10);
  }
}

TEST_CASE("constant log spectrum normalizes to zero") {
  const FeatureExtractor fx;
  std::vector<std::vector<double>> lm(30, std::vector<double>(24));
  Gen g(2);
  const auto shape = g.signal(24, 2.0);
  for (auto& f : lm) f = shape;
  for (const auto& f : fx.smooth_and_normalize(lm)) {
    for (double v : f) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("gain does not change the statics") {
  Gen g(3);
  auto x = g.signal(16000, 0.1);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= 1.0 + 0.8 * std::sin(static_cast<double>(i) * 0.002);
  std::vector<double> y = x;
  for (double& v : y) v *= 4.0;
  const auto a = extract_features(AudioBuffer(16000, {x}));
  const auto b = extract_features(AudioBuffer(16000, {y}));
  REQUIRE(a.frames.size() == b.frames.size());
  for (std::size_t t = 0; t < a.frames.size(); ++t) {
    for (std::size_t i = 0; i < 24; ++i) CHECK(std::abs(a.frames[t].statics[i] - b.frames[t].statics[i]) < 1e-8);
  }
}

TEST_CASE("extraction follows FFT, mel, log, DCT, lifter, CMS, IDCT, deltas") {
  Gen g(4);
  const auto x = g.signal(8000, 0.1);
  const AudioBuffer audio(16000, {x});
  const FeatureOptions o;
  // hand-built composition
  const auto w = make_window(Window::kHamming, 400);
  const MelFilterbank bank;
  const Dct dct(24);
  std::vector<std::vector<double>> cep;
  for (std::size_t s = 0; s + 400 <= x.size(); s += 160) {
    std::vector<double> seg(400);
    for (std::size_t i = 0; i < 400; ++i) seg[i] = x[s + i] * w[i];
    const auto spec = gssfront::testing::naive_dft(seg);
    std::vector<double> p(spec.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::norm(spec[k]);
    auto e = bank.apply(p);
    for (double& v : e) v = std::log(std::max(v, o.log_floor));
    auto c = dct.forward(e);
    c[0] = 0.0;
    for (std::size_t i = 13; i < 24; ++i) c[i] = 0.0;
    cep.push_back(c);
  }
  for (std::size_t i = 0; i < 24; ++i) {
    double m = 0.0;
    for (const auto& c : cep) m += c[i];
    m /= static_cast<double>(cep.size());
    for (auto& c : cep) c[i] -= m;
  }
  std::vector<std::vector<double>> statics;
  for (const auto& c : cep) statics.push_back(dct.inverse(c));
  const auto deltas = compute_deltas(statics, 2);

  const auto fs = extract_features(audio, o);
  REQUIRE(fs.frames.size() == statics.size());
  CHECK(fs.deltas_available);
  for (std::size_t t = 0; t < statics.size(); ++t) {
    CHECK(fs.frames[t].index == static_cast<std::int64_t>(t));
    CHECK(fs.frames[t].delta_valid == (t >= 2 && t + 2 < statics.size()));
    for (std::size_t i = 0; i < 24; ++i) {
      CHECK(std::abs(fs.frames[t].statics[i] - statics[t][i]) < 1e-8);
      CHECK(std::abs(fs.frames[t].deltas[i] - deltas[t][i]) < 1e-8);
    }
    CHECK(fs.frames[t].concatenated().size() == 48);
  }
}

TEST_CASE("cepstra 0 and 13-23 are zeroed; lifter is idempotent") {
  Gen g(5);
  for (int t = 0; t < 20; ++t) {
    auto c = g.signal(24, 1.0);
    const auto orig = c;
    apply_lifter(c, 1, 12);
    CHECK(c[0] == 0.0);
    for (std::size_t i = 1; i <= 12; ++i) CHECK(c[i] == orig[i]);
    for (std::size_t i = 13; i < 24; ++i) CHECK(c[i] == 0.0);
    auto twice = c;
    apply_lifter(twice, 1, 12);
    CHECK(twice == c);
  }
}

TEST_CASE("short utterances have no deltas") {
  const auto fs = extract_features(AudioBuffer(16000, {std::vector<double>(400 + 3 * 160, 0.01)}));
  CHECK(fs.frames.size() == 4);
  CHECK_FALSE(fs.deltas_available);
  for (const auto& f : fs.frames) {
    CHECK_FALSE(f.delta_valid);
    for (double d : f.deltas) CHECK(d == 0.0);
  }
}

TEST_CASE("extraction rejects the wrong rate and channel count") {
  CHECK(kind_of([] { extract_features(AudioBuffer(48000, 1, 2000)); }) == ErrorKind::kInvalidConfig);
  CHECK(kind_of([] { extract_features(AudioBuffer(16000, 2, 2000)); }) == ErrorKind::kInvalidInput);
}

TEST_CASE("feature extraction is deterministic") {
  Gen g(6);
  const AudioBuffer a(16000, {g.signal(12000)});
  const auto x = extract_features(a), y = extract_features(a);
  REQUIRE(x.frames.size() == y.frames.size());
  for (std::size_t t = 0; t < x.frames.size(); ++t) {
    CHECK(x.frames[t].statics == y.frames[t].statics);
    CHECK(x.frames[t].deltas == y.frames[t].deltas);
  }
}

TEST_CASE("deltas of a reversed utterance are the negated reversal") {
  Gen g(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<double>> s;
    const std::size_t n = g.index(5, 40);
    for (std::size_t t = 0; t < n; ++t) s.push_back(g.signal(24, 1.0));
    auto r = s;
    std::reverse(r.begin(), r.end());
    std::vector<bool> vs, vr;
    const auto ds = compute_deltas(s, 2, &vs), dr = compute_deltas(r, 2, &vr);
    for (std::size_t t = 0; t < n; ++t) {
      CHECK(vr[t] == vs[n - 1 - t]);
      for (std::size_t i = 0; i < 24; ++i) CHECK(dr[t][i] == -ds[n - 1 - t][i]);
    }
  }
}

TEST_CASE("regression deltas of a linear ramp are its slope") {
  std::vector<std::vector<double>> s;
  for (int t = 0; t < 10; ++t) s.push_back({0.5 * t, -2.0 * t});
  const auto d = compute_deltas(s, 2);
  for (int t = 2; t < 8; ++t) {
    CHECK(d[static_cast<std::size_t>(t)][0] == doctest::Approx(0.5));
    CHECK(d[static_cast<std::size_t>(t)][1] == doctest::Approx(-2.0));
  }
}

TEST_CASE("mask examples") {
  const std::vector<double> in{1.0, 2.0, 3.0};
  auto r = compute_mask(in, in, std::vector<double>(3, 0.0), 0.25);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.continuous[i] == 1.0);
    CHECK(r.reliable[i] == 1);
  }
  r = compute_mask(in, std::vector<double>(3, 0.0), std::vector<double>(3, 0.0), 0.25);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.continuous[i] == 0.0);
    CHECK(r.reliable[i] == 0);
  }
  // noise-only band
  r = compute_mask(in, std::vector<double>{1e-4, 1e-4, 1e-4}, std::vector<double>{0.98, 1.95, 2.9}, 0.25);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.continuous[i] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(r.reliable[i] == 1);
  }
  // silent band below the floor counts as reliable
  r = compute_mask(std::vector<double>{1.0, 1e-14}, std::vector<double>{0.0, 0.0},
                   std::vector<double>{0.0, 0.0}, 0.25);
  CHECK(r.reliable[0] == 0);
  CHECK(r.reliable[1] == 1);
  CHECK(r.continuous[1] == 1.0);
  // exactly T is unreliable
  r = compute_mask(std::vector<double>{4.0}, std::vector<double>{1.0}, std::vector<double>{0.0}, 0.25);
  CHECK(r.reliable[0] == 0);
}

TEST_CASE("delta mask is the product over five rows") {
  Gen g(8);
  std::vector<MaskRow> ones(5, MaskRow{{1, 1}, {1, 1}, {0, 0}});
  CHECK(delta_mask(ones) == std::vector<std::uint8_t>{1, 1});
  ones[3].reliable[1] = 0;
  CHECK(delta_mask(ones) == std::vector<std::uint8_t>{1, 0});
  for (int trial = 0; trial < 50; ++trial) {
    MaskMatrix m;
    m.num_bands = 24;
    for (int t = 0; t < 30; ++t) m.rows.push_back(random_row(g, 24, 0.85));
    fill_delta_masks(m, 2);
    for (std::size_t t = 0; t < 30; ++t) {
      for (std::size_t i = 0; i < 24; ++i) {
        int prod = 0;
        if (t >= 2 && t + 2 < 30) {
          prod = 1;
          for (std::size_t u = t - 2; u <= t + 2; ++u) prod *= m.rows[u].reliable[i];
        }
        CHECK(m.rows[t].delta_reliable[i] == prod);
      }
    }
  }
}

TEST_CASE("threshold changes flip exactly the bands in between") {
  Gen g(9);
  for (int trial = 0; trial < 200; ++trial) {
    const double t1 = g.uniform(0.15, 0.30), t2 = g.uniform(0.15, 0.30);
    std::vector<double> in(24), out(24), n(24);
    for (std::size_t i = 0; i < 24; ++i) {
      in[i] = g.uniform(0.01, 1.0);
      out[i] = in[i] * g.uniform(0.0, 0.4);
      n[i] = in[i] * g.uniform(0.0, 0.1);
    }
    const auto a = compute_mask(in, out, n, t1), b = compute_mask(in, out, n, t2);
    for (std::size_t i = 0; i < 24; ++i) {
      const double m = a.continuous[i];
      const bool between = m > std::min(t1, t2) && m <= std::max(t1, t2);
      CHECK((a.reliable[i] != b.reliable[i]) == between);
    }
  }
}

TEST_CASE("raising the output energy never makes a band unreliable") {
  Gen g(10);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> in(24), out(24), n(24);
    for (std::size_t i = 0; i < 24; ++i) {
      in[i] = g.uniform(0.01, 1.0);
      out[i] = in[i] * g.uniform(0.0, 0.5);
      n[i] = in[i] * g.uniform(0.0, 0.2);
    }
    const auto a = compute_mask(in, out, n, 0.25);
    for (std::size_t i = 0; i < 24; ++i) out[i] += g.uniform(0.0, 0.3);
    const auto b = compute_mask(in, out, n, 0.25);
    for (std::size_t i = 0; i < 24; ++i) CHECK(b.reliable[i] >= a.reliable[i]);
  }
}

TEST_CASE("nearest-frame alignment") {
  const auto map = nearest_frame_map(5, 0.0125, 0.01, 10, 0.0107, 0.0107);
  CHECK(map == std::vector<std::size_t>{0, 1, 2, 3, 4});
  const auto clamped = nearest_frame_map(3, 1.0, 1.0, 2, 0.0, 0.1);
  CHECK(clamped == std::vector<std::size_t>{1, 1, 1});
  CHECK(kind_of([] { nearest_frame_map(3, 0, 1, 0, 0, 1); }) == ErrorKind::kStream);
}

TEST_CASE("noise-only stretch of a scene is marked reliable") {
  SceneSpec spec;
  spec.duration_s = 3.0;
  spec.mic_positions = fig4_microphones();
  SceneSource s;
  s.id = "a";
  s.onset_s = 1.5;
  spec.sources = {s};
  const auto audio = synthesize(spec);
  PipelineConfig cfg;
  cfg.mics = spec.mic_positions;
  cfg.sources = {{"a", 0.0, 0.0}};
  const auto r = process_mixture(cfg, audio.mixture);
  REQUIRE(r.masks.size() == 1);
  std::size_t total = 0, reliable = 0;
  for (std::size_t t = 0; t < r.masks[0].rows.size(); ++t) {
    const double centre = (160.0 * static_cast<double>(t) + 200.0) / 16000.0;
    if (centre < 0.3 || centre > 1.2) continue;
    for (auto b : r.masks[0].rows[t].reliable) {
      ++total;
      reliable += b;
    }
  }
  REQUIRE(total > 0);
  CHECK(static_cast<double>(reliable) / static_cast<double>(total) >= 0.95);
}

TEST_CASE("feature and mask files round-trip") {
  Gen g(11);
  const auto fs = extract_features(AudioBuffer(16000, {g.signal(6000)}));
  MaskMatrix mask;
  mask.num_bands = 24;
  for (std::size_t t = 0; t < fs.frames.size(); ++t) mask.rows.push_back(random_row(g, 24));
  fill_delta_masks(mask, 2);

  auto same_features = [&](const FeatureStream& b) {
    REQUIRE(b.frames.size() == fs.frames.size());
    CHECK(b.deltas_available == fs.deltas_available);
    for (std::size_t t = 0; t < fs.frames.size(); ++t) {
      CHECK(b.frames[t].index == fs.frames[t].index);
      CHECK(b.frames[t].statics == fs.frames[t].statics);
      CHECK(b.frames[t].deltas == fs.frames[t].deltas);
      CHECK(b.frames[t].delta_valid == fs.frames[t].delta_valid);
    }
  };
  auto same_mask = [&](const MaskMatrix& b) {
    CHECK(b.threshold == mask.threshold);
    CHECK(b.num_bands == 24);
    REQUIRE(b.rows.size() == mask.rows.size());
    for (std::size_t t = 0; t < mask.rows.size(); ++t) {
      CHECK(b.rows[t].continuous == mask.rows[t].continuous);
      CHECK(b.rows[t].reliable == mask.rows[t].reliable);
      CHECK(b.rows[t].delta_reliable == mask.rows[t].delta_reliable);
    }
  };
  same_features(decode_features(encode_features(fs)));
  std::stringstream csv;
  write_features_csv(csv, fs);
  same_features(read_features_csv(csv));
  same_mask(decode_mask(encode_mask(mask)));
  std::stringstream mcsv;
  write_mask_csv(mcsv, mask);
  same_mask(read_mask_csv(mcsv));

  const auto dir = std::filesystem::temp_directory_path() / "gssfront_fio_test";
  std::filesystem::create_directories(dir);
  save_features(dir / "f.bin", fs);
  save_features(dir / "f.csv", fs);
  save_mask(dir / "m.bin", mask);
  same_features(load_features(dir / "f.bin"));
  same_features(load_features(dir / "f.csv"));
  same_mask(load_mask(dir / "m.bin"));
  std::filesystem::remove_all(dir);

  auto bytes = encode_features(fs);
  bytes.pop_back();
  CHECK(kind_of([&] { decode_features(bytes); }) == ErrorKind::kInvalidInput);
  CHECK(kind_of([&] { load_mask(dir / "missing.bin"); }) == ErrorKind::kIo);
}
