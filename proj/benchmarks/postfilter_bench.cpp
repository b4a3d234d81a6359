// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <benchmark/benchmark.h>

#include <random>

#include "gssfront/postfilter.hpp"
#include "gssfront/spectral_gain.hpp"

namespace {

using namespace gssfront;

void BM_PostfilterFrame(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  MultiSourcePostfilter pf(m, 513);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<SpectralFrame> frames;
  for (int t = 0; t < 64; ++t) {
    SpectralFrame y(t, 1024, 48000, m);
    for (auto& ch : y.bins) {
      for (auto& v : ch) v = {n(rng), n(rng)};
    }
    frames.push_back(std::move(y));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    auto s = pf.process(frames[i++ % frames.size()]);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_PostfilterFrame)->DenseRange(1, 4);

void BM_GainH1(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0));
  double xi = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gain_h1(xi, 3.0, alpha));
    xi = xi < 10.0 ? xi * 1.01 : 0.5;
  }
}
BENCHMARK(BM_GainH1)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
