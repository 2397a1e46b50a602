#include "doctest.h"

#include <numbers>

#include "flatprox/process.hpp"
#include "oracles.hpp"

using namespace flatprox;

namespace {

ModelParams params(int d, int k, double t = 1.0) {
  ModelParams p;
  p.d = d;
  p.k = k;
  p.t = t;
  return p;
}

}  // namespace

TEST_CASE("hitting mean") {
  CHECK(hitting_mean(1.0, params(3, 1)) == doctest::Approx(std::numbers::pi));
  CHECK(hitting_mean(2.0, params(3, 1, 0.5)) == doctest::Approx(0.5 * std::numbers::pi * 4.0));
  CHECK(hitting_mean(1.0, params(5, 2)) == doctest::Approx(oracle::ball_volume(3)));
}

TEST_CASE("enclosing radius") {
  CHECK(enclosing_radius_for_proximity(Window::ball(3, 1.0), 1.0) ==
        doctest::Approx(1.5).epsilon(1e-8));
  CHECK(enclosing_radius_for_proximity(Window::ball(3, 1.0, 4.0), 0.0) >= 4.0);
  CHECK(enclosing_radius_for_proximity(Window::box({1, 1, 1}), 2.0) ==
        doctest::Approx(std::sqrt(3.0) + 1.0).epsilon(1e-8));
}

TEST_CASE("model validation") {
  CHECK_NOTHROW(params(3, 1).validate());
  CHECK_THROWS_AS(params(4, 2).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(3, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(2, 1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(3, 1, 0.0).validate(), std::invalid_argument);
  auto p = params(3, 1);
  p.delta = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("flat count is Poisson with the hitting mean") {
  const auto P = params(3, 1, 2.0);
  const SampleRegion region{1.5};
  Rng rng(51);
  const int reps = 10000;
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const double n = static_cast<double>(sample_process(region, P, rng).flats.size());
    s += n;
    s2 += n * n;
  }
  const double mean = s / reps, var = s2 / reps - mean * mean;
  const double lambda = hitting_mean(1.5, P);
  CHECK(std::abs(mean - lambda) <= 3.0 * std::sqrt(lambda / reps));
  // Poisson dispersion
  CHECK(var / mean == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("anchors lie in the orthogonal complement within the region") {
  const auto P = params(5, 2, 3.0);
  const SampleRegion region{1.2};
  Rng rng(53);
  for (int r = 0; r < 20; ++r) {
    const auto s = sample_process(region, P, rng);
    for (const auto& f : s.flats) {
      CHECK(f.flat_dim() == 2);
      CHECK(f.anchor().norm() <= 1.2 * (1.0 + 1e-12));
      CHECK((f.basis().transpose() * f.anchor()).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("anchor norms follow (s/R)^(d-k)") {
  const auto P = params(4, 1, 1.0);
  const double R = 2.0;
  Rng rng(57);
  std::vector<double> norms;
  while (norms.size() < 100000) {
    for (const auto& f : sample_process(SampleRegion{R}, P, rng).flats)
      norms.push_back(f.anchor().norm());
  }
  CHECK(oracle::ks(norms, [&](double s) { return std::pow(std::clamp(s / R, 0.0, 1.0), 3.0); }) <
        0.01);
}

TEST_CASE("sampling is deterministic in the seed") {
  const auto P = params(3, 1, 5.0);
  Rng a = make_rng(99, {1, 2});
  Rng b = make_rng(99, {1, 2});
  Rng c = make_rng(99, {1, 3});
  const auto sa = sample_process(SampleRegion{1.0}, P, a);
  const auto sb = sample_process(SampleRegion{1.0}, P, b);
  const auto sc = sample_process(SampleRegion{1.0}, P, c);
  REQUIRE(sa.flats.size() == sb.flats.size());
  for (std::size_t i = 0; i < sa.flats.size(); ++i) {
    CHECK(sa.flats[i].basis() == sb.flats[i].basis());
    CHECK(sa.flats[i].anchor() == sb.flats[i].anchor());
  }
  bool differs = sa.flats.size() != sc.flats.size();
  for (std::size_t i = 0; !differs && i < sa.flats.size(); ++i)
    differs = sa.flats[i].anchor() != sc.flats[i].anchor();
  CHECK(differs);
}
