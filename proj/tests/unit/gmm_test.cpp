// Copyright 2026 The gssfront Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "gssfront/error.hpp"
#include "gssfront/gmm.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace gssfront;
using gssfront::testing::Gen;
using gssfront::testing::gaussian_pdf;

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

GmmModel random_model(Gen& g, std::size_t m, std::size_t d) {
  std::vector<double> w(m);
  std::vector<std::vector<double>> mu(m, std::vector<double>(d)), var(m, std::vector<double>(d));
  for (std::size_t j = 0; j < m; ++j) {
    w[j] = g.uniform(0.1, 1.0);
    for (std::size_t k = 0; k < d; ++k) {
      mu[j][k] = g.normal(2.0);
      var[j][k] = g.uniform(0.2, 2.0);
    }
  }
  return GmmModel(w, mu, var);
}

// Direct mixture density over the masked dims with the scalar Gaussian.
double density_oracle(const GmmModel& m, const std::vector<double>& x,
                      const std::vector<std::uint8_t>& mask) {
  double s = 0.0;
  for (std::size_t j = 0; j < m.num_components(); ++j) {
    double p = m.prior(j);
    for (std::size_t d = 0; d < x.size(); ++d) {
      if (mask[d]) p *= gaussian_pdf(x[d], m.mean(j)[d], m.variance(j)[d]);
    }
    s += p;
  }
  return s;
}

std::vector<double> sample(Gen& g, const GmmModel& m) {
  std::vector<double> w(m.num_components());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = m.prior(j);
  const std::size_t j = std::discrete_distribution<std::size_t>(w.begin(), w.end())(g.engine());
  std::vector<double> x(m.dims());
  for (std::size_t d = 0; d < x.size(); ++d) x[d] = m.mean(j)[d] + g.normal(std::sqrt(m.variance(j)[d]));
  return x;
}

}  // namespace

TEST_CASE("priors are renormalized and invariants enforced") {
  const GmmModel m({2.0, 6.0}, {{0.0}, {1.0}}, {{1.0}, {1.0}});
  CHECK(m.prior(0) + m.prior(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.prior(1) == doctest::Approx(0.75));
  CHECK(kind_of([] { GmmModel({1.0}, {{0.0}}, {{0.0}}); }) == ErrorKind::kInvalidInput);
  CHECK(kind_of([] { GmmModel({1.0}, {{0.0, 1.0}}, {{1.0}}); }) == ErrorKind::kInvalidInput);
}

TEST_CASE("full mask equals the standard mixture log-density") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Gen g(seed);
    const auto m = random_model(g, g.index(1, 5), g.index(1, 6));
    const auto x = g.signal(m.dims(), 2.0);
    const auto full = full_mask(m.dims());
    const double ref = std::log(density_oracle(m, x, full));
    CHECK(std::abs(m.marginal_log_likelihood(x, full) - ref) < 1e-10);
    CHECK(std::abs(m.log_likelihood(x) - ref) < 1e-10);
  }
}

TEST_CASE("empty mask gives log density 0") {
  Gen g(1);
  for (int t = 0; t < 10; ++t) {
    const auto m = random_model(g, 3, 4);
    CHECK(m.marginal_log_likelihood(g.signal(4, 100.0), std::vector<std::uint8_t>(4, 0)) == 0.0);
  }
}

TEST_CASE("2-D toy with the second dim masked is a 1-D mixture") {
  const GmmModel m({0.3, 0.7}, {{-1.0, 4.0}, {2.0, -3.0}}, {{0.5, 2.0}, {1.5, 0.1}});
  for (double x1 : {-2.0, 0.0, 0.7, 3.0}) {
    const double hand = 0.3 * std::exp(-0.5 * (x1 + 1.0) * (x1 + 1.0) / 0.5) / std::sqrt(2 * M_PI * 0.5) +
                        0.7 * std::exp(-0.5 * (x1 - 2.0) * (x1 - 2.0) / 1.5) / std::sqrt(2 * M_PI * 1.5);
    const double got = m.marginal_log_likelihood(std::vector<double>{x1, 123.0}, std::vector<std::uint8_t>{1, 0});
    CHECK(got == doctest::Approx(std::log(hand)).epsilon(1e-12));
  }
}

TEST_CASE("marginal likelihood matches quadrature of the full density") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Gen g(seed + 50);
    const auto m = random_model(g, g.index(1, 4), 2);
    const std::vector<double> x{g.normal(2.0), g.normal(2.0)};
    for (std::size_t keep = 0; keep < 2; ++keep) {
      const std::size_t drop = 1 - keep;
      double lo = 1e9, hi = -1e9;
      for (std::size_t j = 0; j < m.num_components(); ++j) {
        const double s = std::sqrt(m.variance(j)[drop]);
        lo = std::min(lo, m.mean(j)[drop] - 12 * s);
        hi = std::max(hi, m.mean(j)[drop] + 12 * s);
      }
      const double integral = gssfront::testing::integrate(
          [&](double v) {
            auto y = x;
            y[drop] = v;
            return density_oracle(m, y, {1, 1});
          },
          lo, hi, 200, 20);
      std::vector<std::uint8_t> mask(2, 0);
      mask[keep] = 1;
      const double got = std::exp(m.marginal_log_likelihood(x, mask));
      CHECK(std::abs(got - integral) <= 1e-4 * integral);
    }
  }
}

TEST_CASE("log-sum-exp ignores term order and handles -inf") {
  Gen g(2);
  std::vector<double> v(20);
  for (double& x : v) x = g.uniform(-800, 10);
  const double a = log_sum_exp(v);
  std::reverse(v.begin(), v.end());
  CHECK(log_sum_exp(v) == a);
  CHECK(log_sum_exp({-INFINITY, 0.0}) == 0.0);
  CHECK(std::isinf(log_sum_exp({-INFINITY, -INFINITY})));
}

TEST_CASE("scores do not depend on component order") {
  Gen g(3);
  for (int t = 0; t < 20; ++t) {
    const auto m = random_model(g, 4, 5);
    std::vector<double> w;
    std::vector<std::vector<double>> mu, var;
    for (std::size_t j = 4; j-- > 0;) {
      w.push_back(m.prior(j));
      mu.push_back(m.mean(j));
      var.push_back(m.variance(j));
    }
    const GmmModel r(w, mu, var);
    const auto x = g.signal(5, 2.0);
    std::vector<std::uint8_t> mask(5);
    for (auto& b : mask) b = g.coin() ? 1 : 0;
    CHECK(r.marginal_log_likelihood(x, mask) == m.marginal_log_likelihood(x, mask));
  }
}

TEST_CASE("one component reproduces the sample statistics") {
  Gen g(4);
  std::vector<std::vector<double>> frames;
  for (int i = 0; i < 200; ++i) frames.push_back({g.normal(1.0) + 3.0, g.normal(0.3) - 1.0});
  GmmTrainOptions o;
  o.components = 1;
  const auto m = train_gmm(frames, o);
  REQUIRE(m.num_components() == 1);
  for (std::size_t d = 0; d < 2; ++d) {
    double mean = 0.0;
    for (const auto& f : frames) mean += f[d];
    mean /= 200.0;
    double var = 0.0;
    for (const auto& f : frames) var += (f[d] - mean) * (f[d] - mean);
    var /= 200.0;
    CHECK(m.mean(0)[d] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(m.variance(0)[d] == doctest::Approx(var).epsilon(1e-9));
  }
}

TEST_CASE("two separated clusters are recovered") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Gen g(seed + 10);
    const std::vector<std::vector<double>> centres{{-3.0, 1.0}, {4.0, -2.0}};
    std::vector<std::vector<double>> frames;
    for (int i = 0; i < 2000; ++i) {
      const auto& c = centres[static_cast<std::size_t>(i % 2)];
      frames.push_back({c[0] + g.normal(0.5), c[1] + g.normal(0.5)});
    }
    GmmTrainOptions o;
    o.components = 2;
    o.seed = seed;
    const auto m = train_gmm(frames, o);
    REQUIRE(m.num_components() == 2);
    for (const auto& c : centres) {
      double best = 1e9;
      for (std::size_t j = 0; j < 2; ++j) {
        best = std::min(best, std::hypot(m.mean(j)[0] - c[0], m.mean(j)[1] - c[1]));
      }
      CHECK(best < 0.1);
    }
    for (std::size_t j = 0; j < 2; ++j) CHECK(m.prior(j) == doctest::Approx(0.5).epsilon(0.05));
  }
}

TEST_CASE("training is deterministic for a seed") {
  Gen g(5);
  std::vector<std::vector<double>> frames;
  for (int i = 0; i < 400; ++i) frames.push_back(g.signal(6, 1.0));
  GmmTrainOptions o;
  o.components = 3;
  o.seed = 42;
  CHECK(train_gmm(frames, o) == train_gmm(frames, o));
}

TEST_CASE("constant class falls back to one component; too few frames rejected") {
  std::vector<std::vector<double>> same(100, std::vector<double>{1.0, 2.0});
  GmmTrainOptions o;
  o.components = 3;
  const auto m = train_gmm(same, o);
  CHECK(m.num_components() == 1);
  CHECK(m.variance(0)[0] == o.variance_floor);
  std::vector<std::vector<double>> few(29, std::vector<double>{1.0});
  CHECK(kind_of([&] { train_gmm(few, o); }) == ErrorKind::kInvalidInput);
}

TEST_CASE("variances respect the floor") {
  Gen g(6);
  std::vector<std::vector<double>> frames;
  for (int i = 0; i < 300; ++i) frames.push_back({g.normal(1.0), 0.5 + g.normal(1e-5)});
  GmmTrainOptions o;
  o.components = 2;
  const auto m = train_gmm(frames, o);
  for (std::size_t j = 0; j < m.num_components(); ++j) {
    for (double v : m.variance(j)) CHECK(v >= o.variance_floor);
  }
}

TEST_CASE("classification") {
  Gen g(7);
  const auto a = random_model(g, 2, 4), b = random_model(g, 2, 4);
  const std::vector<GmmModel> one{a};
  std::vector<std::vector<double>> frames;
  for (int i = 0; i < 30; ++i) frames.push_back(sample(g, a));
  CHECK(classify(one, frames, {}).best == 0);
  const std::vector<GmmModel> both{b, a};
  const auto s = classify(both, frames, {});
  CHECK(s.best == 1);
  double sum = 0.0;
  for (const auto& f : frames) sum += a.log_likelihood(f);
  CHECK(s.scores[1] == doctest::Approx(sum).epsilon(1e-12));
  // class order does not change the scores
  const std::vector<GmmModel> swapped{a, b};
  const auto t = classify(swapped, frames, {});
  CHECK(t.best == 0);
  CHECK(t.scores[0] == s.scores[1]);
  CHECK(t.scores[1] == s.scores[0]);
}

TEST_CASE("masking the discriminative dims erases the score difference") {
  // Shared dims 0-1, differing dims 2-3.
  const GmmModel a({0.4, 0.6}, {{0, 1, 5, 5}, {1, 0, 6, 4}}, {{1, 2, 1, 1}, {0.5, 1, 1, 1}});
  const GmmModel b({0.4, 0.6}, {{0, 1, -5, 2}, {1, 0, -3, 0}}, {{1, 2, 3, 1}, {0.5, 1, 1, 2}});
  Gen g(8);
  std::vector<std::vector<double>> frames;
  for (int i = 0; i < 20; ++i) frames.push_back(g.signal(4, 3.0));
  const std::vector<std::vector<std::uint8_t>> masks(20, {1, 1, 0, 0});
  const std::vector<GmmModel> models{a, b};
  const auto s = classify(models, frames, masks);
  CHECK(std::abs(s.scores[0] - s.scores[1]) < 1e-9);
}

TEST_CASE("true reliability masks beat inverted masks") {
  // Two classes; each trial corrupts a random subset of dims with strong
  // noise. The true mask drops the corrupted dims; the inverted mask keeps
  // only them.
  Gen g(9);
  const std::size_t dims = 8;
  auto make = [&](double offset) {
    std::vector<std::vector<double>> mu(2, std::vector<double>(dims)), var(2, std::vector<double>(dims, 1.0));
    for (std::size_t d = 0; d < dims; ++d) {
      mu[0][d] = offset + 0.3 * static_cast<double>(d % 3);
      mu[1][d] = offset - 0.2 * static_cast<double>(d % 2);
    }
    return GmmModel({0.5, 0.5}, mu, var);
  };
  const std::vector<GmmModel> models{make(0.0), make(1.5)};
  int right_true = 0, right_inverted = 0;
  const int trials = 500;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t cls = g.index(0, 1);
    std::vector<std::vector<double>> frames;
    std::vector<std::vector<std::uint8_t>> mask, inverted;
    for (int f = 0; f < 5; ++f) {
      auto x = sample(g, models[cls]);
      std::vector<std::uint8_t> m(dims, 1), inv(dims, 0);
      for (std::size_t d = 0; d < dims; ++d) {
        if (g.coin(0.4)) {
          x[d] += g.normal(6.0);
          m[d] = 0;
          inv[d] = 1;
        }
      }
      frames.push_back(x);
      mask.push_back(m);
      inverted.push_back(inv);
    }
    right_true += classify(models, frames, mask).best == cls;
    right_inverted += classify(models, frames, inverted).best == cls;
  }
  CHECK(right_true >= right_inverted);
  CHECK(static_cast<double>(right_true) / trials > 0.8);
}

TEST_CASE("classifier training and model file round trip") {
  Gen g(10);
  LabeledFeatureSet data;
  data.class_names = {"alpha", "beta"};
  for (int i = 0; i < 300; ++i) {
    const std::size_t c = static_cast<std::size_t>(i % 2);
    auto x = g.signal(4, 1.0);
    for (double& v : x) v += c ? 2.0 : -2.0;
    data.features.push_back(x);
    data.labels.push_back(c);
  }
  GmmTrainOptions o;
  o.components = 2;
  const auto clf = train_classifier(data, o);
  REQUIRE(clf.models.size() == 2);
  CHECK(clf.dims() == 4);
  std::stringstream ss;
  write_classifier(ss, clf);
  const auto text = ss.str();
  CHECK(text.rfind("gssfront-gmm 1\nclasses 2\ndims 4\nclass alpha", 0) == 0);
  const auto back = read_classifier(ss);
  CHECK(back.class_names == clf.class_names);
  REQUIRE(back.models.size() == 2);
  CHECK(back.models[0] == clf.models[0]);
  CHECK(back.models[1] == clf.models[1]);

  std::stringstream bad(text.substr(0, text.size() - 3));
  CHECK(kind_of([&] { read_classifier(bad); }) == ErrorKind::kInvalidInput);

  data.masks.push_back({1, 1});
  CHECK(kind_of([&] { data.validate(); }) == ErrorKind::kInvalidInput);
}

TEST_CASE("wrong feature width is an invalid input") {
  const GmmModel m({1.0}, {{0.0, 0.0}}, {{1.0, 1.0}});
  CHECK(kind_of([&] { m.log_likelihood(std::vector<double>{1.0}); }) == ErrorKind::kInvalidInput);
}
