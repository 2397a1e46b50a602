#include "doctest.h"

#include <numbers>

#include "flatprox/kernels.hpp"
#include "flatprox/process.hpp"
#include "flatprox/proximity.hpp"
#include "flatprox/stats.hpp"
#include "oracles.hpp"

using namespace flatprox;

namespace {

ModelParams params(int d, int k, double t = 1.0, double delta = 1.0) {
  ModelParams p;
  p.d = d;
  p.k = k;
  p.t = t;
  p.delta = delta;
  return p;
}

KernelContext context(const ModelParams& P, const Window& K, std::size_t inner,
                      std::size_t outer, std::uint64_t seed = 0) {
  KernelContext c;
  c.params = P;
  c.window = K;
  c.inner_samples = inner;
  c.outer_samples = outer;
  c.seed = seed;
  return c;
}

AffineFlatd axis_line(int d, int axis, const PointX<double>& through) {
  BasisX<double> B = BasisX<double>::Zero(d, 1);
  B(axis, 0) = 1.0;
  return canonicalize<double>(B, through);
}

// f1 straight from its definition: t * int int 1{pair counted} dy Q(dL), with
// offsets uniform in a ball of L-perp large enough to hold every counted F.
oracle::McEstimate f1_by_definition(const AffineFlatd& E, const ModelParams& P, double window_radius,
                                    int n, std::mt19937_64& rng) {
  const int d = P.d, k = P.k;
  const double R = window_radius + P.delta;
  std::uniform_real_distribution<double> unif;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const oracle::Mat L = oracle::random_matrix(d, k, rng).householderQr().householderQ() *
                          oracle::Mat::Identity(d, k);
    oracle::Vec y = oracle::random_matrix(d, 1, rng).col(0);
    y -= L * (L.transpose() * y);
    y *= R * std::pow(unif(rng), 1.0 / (d - k)) / y.norm();
    const auto m = oracle::svd_closest(oracle::Vec(E.anchor()), oracle::Mat(E.basis()), y, L);
    const double v =
        m.distance <= P.delta && (0.5 * (m.point_on_first + m.point_on_second)).norm() <= window_radius
            ? 1.0
            : 0.0;
    s += v;
    s2 += v;
  }
  const double scale = P.t * oracle::ball_volume(d - k) * std::pow(R, d - k);
  const double p = s / n;
  return {scale * p, scale * std::sqrt(p * (1.0 - p) / n)};
}

}  // namespace

TEST_CASE("slice volumes") {
  const auto B = Window::ball(3, 1.0);
  const auto E = axis_line(3, 0, PointX<double>::Zero(3));
  CHECK(slice_volume(B, E, PointX<double>::Zero(3)).value == doctest::Approx(2.0));
  PointX<double> far(3);
  far << 0.0, 2.0, 0.0;
  CHECK(slice_volume(B, E, far).value == 0.0);
  PointX<double> y(3);
  y << 0.0, 0.6, 0.0;
  CHECK(slice_volume(B, E, y).value == doctest::Approx(1.6));
  // the offset component along the flat is ignored
  y << 5.0, 0.6, 0.0;
  CHECK(slice_volume(B, E, y).value == doctest::Approx(1.6));

  const auto X = Window::box({1.0, 2.0, 3.0});
  CHECK(slice_volume(X, axis_line(3, 2, PointX<double>::Zero(3)), PointX<double>::Zero(3)).value ==
        doctest::Approx(6.0));
  // plane slice through the box in R^5 by hit-or-miss
  const auto X5 = Window::box({1.0, 1.0, 1.0, 1.0, 1.0});
  BasisX<double> P2 = BasisX<double>::Zero(5, 2);
  P2(0, 0) = P2(1, 1) = 1.0;
  const auto plane = canonicalize<double>(P2, PointX<double>::Zero(5));
  Rng rng(81);
  const auto s = slice_volume(X5, plane, PointX<double>::Zero(5), &rng, 200000);
  CHECK(std::abs(s.value - 4.0) <= 4.0 * s.standard_error);
  CHECK_THROWS(slice_volume(X5, plane, PointX<double>::Zero(5)));
}

TEST_CASE("f1 matches its definition") {
  const auto P = params(3, 1, 1.0, 0.8);
  const auto K = Window::ball(3, 1.0);
  const auto ctx = context(P, K, 200000, 10);
  Rng rng(83);
  std::mt19937_64 orng(85);
  PointX<double> p(3);
  for (double h : {0.0, 0.5, 1.1}) {
    p << 0.0, h, 0.2;
    const auto E = axis_line(3, 0, p);
    const auto a = f1_eval(E, ctx, rng);
    const auto b = f1_by_definition(E, P, 1.0, 400000, orng);
    CAPTURE(h);
    CHECK(std::abs(a.value - b.value) <= 4.0 * std::hypot(a.standard_error, b.standard_error));
  }
}

TEST_CASE("f1 vanishes far from the window and for delta = 0") {
  const auto P = params(3, 1);
  const auto ctx = context(P, Window::ball(3, 1.0), 100, 10);
  Rng rng(87);
  PointX<double> p(3);
  p << 0.0, 1.6, 0.0;
  CHECK(f1_eval(axis_line(3, 0, p), ctx, rng).value == 0.0);
  auto zero = ctx;
  zero.params.delta = 0.0;
  CHECK(f1_eval(axis_line(3, 0, PointX<double>::Zero(3)), zero, rng).value == 0.0);
  CHECK_THROWS(f1_eval(axis_line(3, 0, p), ctx, rng, 1));
}

TEST_CASE("small-delta limit of f1") {
  for (auto [d, k] : {std::pair{3, 1}, {5, 2}}) {
    const auto P = params(d, k, 1.5, 1e-3);
    const auto K = Window::ball(d, 1.0);
    const auto ctx = context(P, K, 100000, 10);
    Rng rng(89);
    BasisX<double> B = BasisX<double>::Zero(d, k);
    for (int i = 0; i < k; ++i) B(i, i) = 1.0;
    PointX<double> y = PointX<double>::Zero(d);
    y(d - 1) = 0.3;
    const auto E = canonicalize<double>(B, y);
    const int j = d - 2 * k;
    const double slice = oracle::ball_volume(k) * std::pow(1.0 - 0.09, 0.5 * k);
    const double limit = P.t * oracle::ball_volume(j) * std::pow(P.delta, j) * slice *
                         haar_mean_determinant(d, k);
    const auto f = f1_eval(E, ctx, rng);
    CHECK(std::abs(f.value - limit) <= 4.0 * f.standard_error + 1e-2 * limit);
  }
}

TEST_CASE("f1 is bounded by the uniform constant") {
  const auto P = params(5, 2, 2.0, 0.7);
  for (double rho : {1.0, 2.0}) {
    const auto K = Window::ball(5, 1.0, rho);
    const auto ctx = context(P, K, 2000, 10);
    const double C = kolmogorov_bound(P, K, 1.0).constant_c * std::pow(rho, P.k);
    Rng rng(91);
    for (int i = 0; i < 30; ++i) {
      const auto L = haar_grassmannian_sample<double>(5, 2, rng);
      const PointX<double> y = 0.3 * rho * oracle::random_direction(5, rng);
      CHECK(f1_eval(L.translated(y), ctx, rng).value <= C);
    }
  }
}

TEST_CASE("variance decomposition") {
  const auto P = params(3, 1);
  const auto K = Window::ball(3, 1.0);
  const auto v = variance_finite_rho(context(P, K, 200, 400, 3));
  CHECK(v.f2_term == doctest::Approx(expected_proximity(P, K)));
  CHECK(v.variance == doctest::Approx(v.f1_norm_sq + v.f2_term));
  CHECK(v.f1_norm_sq > 0.0);

  auto Z = P;
  Z.delta = 0.0;
  const auto z = variance_finite_rho(context(Z, K, 200, 400, 3));
  CHECK(z.variance == 0.0);
  CHECK(z.f2_term == 0.0);

  const auto w1 = variance_finite_rho(context(P, K, 200, 400, 3));
  CHECK(w1.variance == v.variance);
  auto threaded = context(P, K, 200, 400, 3);
  threaded.workers = 3;
  CHECK(variance_finite_rho(threaded).variance == v.variance);
  CHECK_THROWS(variance_finite_rho(context(P, K, 2, 400)));
}

TEST_CASE("kernel variance matches simulated variance") {
  const auto P = params(3, 1, 1.0, 1.0);
  const auto K = Window::ball(3, 1.0, 2.0);
  const auto v = variance_finite_rho(context(P, K, 1000, 2000, 5));
  Rng rng(93);
  std::vector<double> counts(10000);
  const SampleRegion region{enclosing_radius_for_proximity(K, P.delta)};
  for (auto& c : counts)
    c = static_cast<double>(proximity_count(sample_process(region, P, rng), K, P.delta,
                                            kGeneralPositionTol, PairEnumeration::pruned)
                                .count);
  const auto s = summarize(counts);
  CHECK(std::abs(s.mean - expected_proximity(P, K)) <= 3.0 * s.mean_se);
  CHECK(std::abs(s.variance - v.variance) <= 3.0 * std::hypot(s.variance_se, v.standard_error));
  CHECK(v.standard_error < 0.02 * v.variance);
}

TEST_CASE("Kolmogorov bound") {
  const auto P = params(3, 1);
  const auto K1 = Window::ball(3, 1.0);
  const double limit = asymptotic_variance_limit(P, K1);
  const int d = P.d, k = P.k;
  std::vector<double> scaled;
  for (double rho : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    const auto b = kolmogorov_bound(P, K1.with_scale(rho), limit * std::pow(rho, d + k));
    CHECK(std::isfinite(b.bound));
    CHECK(b.bound > 0.0);
    CHECK(b.m11 > 0.0);
    scaled.push_back(b.bound * std::pow(rho, 0.5 * (d - k)));
  }
  for (std::size_t i = 1; i < scaled.size(); ++i) CHECK(scaled[i] <= scaled[i - 1] * (1 + 1e-12));
  CHECK(scaled.back() >= 0.5 * scaled.front() * std::pow(16.0, -0.5));
  const auto b = kolmogorov_bound(P, K1, 2.0);
  CHECK(b.bound == doctest::Approx(0.5 * kolmogorov_bound(P, K1, 1.0).bound));
  CHECK(b.hitting_measure == doctest::Approx(std::numbers::pi * 4.0));
}

TEST_CASE("general asymptotic-variance integral") {
  const auto P = params(3, 1);
  const auto B = Window::ball(3, 1.0);
  const auto mc = script_I_monte_carlo(context(P, B, 400, 400, 7));
  CHECK(std::abs(mc.value - script_I(B, 3, 1)) <= 4.0 * mc.standard_error);

  const auto X = Window::box({0.5, 1.0, 1.0});
  const auto mx = script_I_monte_carlo(context(P, X, 400, 400, 7));
  CHECK(std::abs(mx.value - script_I(X, 3, 1)) <= 4.0 * mx.standard_error);

  const auto P5 = params(5, 2);
  const auto m5 = script_I_monte_carlo(context(P5, Window::ball(5, 1.0), 300, 300, 7));
  CHECK(std::abs(m5.value - script_I(Window::ball(5, 1.0), 5, 2)) <= 4.0 * m5.standard_error);
}

TEST_CASE("f1 scaling relation between K_rho and K") {
  Rng rng(95);
  for (double rho : {2.0, 3.0}) {
    const auto P = params(3, 1, 1.0, 0.9);
    auto big = context(P, Window::ball(3, 1.0, rho), 100000, 10);
    auto small = big;
    small.params.delta = P.delta / rho;
    small.window = Window::ball(3, 1.0);
    const auto M = haar_grassmannian_sample<double>(3, 1, rng);
    PointX<double> y(3);
    y << 0.2 * rho, -0.3 * rho, 0.1 * rho;
    const auto a = f1_eval(M.translated(y), big, rng);
    const auto b = f1_eval(M.translated(y / rho), small, rng);
    const double f = rho * rho;
    CHECK(std::abs(a.value - f * b.value) <= 4.0 * std::hypot(a.standard_error, f * b.standard_error));
  }
}
