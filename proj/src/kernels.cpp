#include "flatprox/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "flatprox/stats.hpp"

namespace flatprox {
namespace {

Estimate mean_estimate(std::span<const double> values) {
  const auto s = summarize(values);
  return {s.mean, s.mean_se};
}

PointX<double> random_unit_vector(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  PointX<double> v(n);
  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    norm = v.norm();
  } while (!(norm > 0.0));
  return v / norm;
}

// Offset with norm in [r0, r1], uniform w.r.t. Lebesgue measure on M^perp.
PointX<double> offset_in_shell(const AffineFlatd& M, double r0, double r1, Rng& rng) {
  const int d = M.ambient_dim();
  const int n = d - M.flat_dim();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double a = std::pow(r0, n), b = std::pow(r1, n);
  const double s = std::pow(a + unif(rng) * (b - a), 1.0 / n);
  const FrameX<double> perp = orthogonal_complement<double>(M.basis());
  return s * (perp * random_unit_vector(n, rng));
}

double box_chord(const Window& window, const PointX<double>& p, const PointX<double>& dir) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < window.dim(); ++i) {
    const double A = window.scale() * window.halfwidths()[static_cast<std::size_t>(i)];
    if (std::abs(dir(i)) < 1e-300) {
      if (std::abs(p(i)) > A) return 0.0;
      continue;
    }
    double t0 = (-A - p(i)) / dir(i), t1 = (A - p(i)) / dir(i);
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  return hi > lo ? hi - lo : 0.0;
}

}  // namespace

Estimate slice_volume(const Window& window, const AffineFlatd& direction,
                      const PointX<double>& offset, Rng* rng, std::size_t mc_samples) {
  const int k = direction.flat_dim();
  const auto& B = direction.basis();
  if (offset.size() != direction.ambient_dim() || window.dim() != direction.ambient_dim())
    throw std::invalid_argument("slice_volume: dimension mismatch");
  PointX<double> y = offset;
  y.noalias() -= B * (B.transpose() * offset);

  if (window.shape() == Window::Shape::ball) {
    const double R = window.scale() * window.radius();
    const double h = R * R - y.squaredNorm();
    if (h <= 0.0) return {0.0, 0.0};
    return {unit_ball_volume(k) * std::pow(h, 0.5 * k), 0.0};
  }
  if (k == 1) return {box_chord(window, y, B.col(0)), 0.0};

  // k >= 2 box: hit-or-miss inside the circumscribed k-ball of the slice
  const double Rc = window.circumradius();
  const double h = Rc * Rc - y.squaredNorm();
  if (h <= 0.0) return {0.0, 0.0};
  if (rng == nullptr) throw std::invalid_argument("slice_volume: box slices with k >= 2 need an rng");
  if (mc_samples == 0) throw std::invalid_argument("slice_volume: mc_samples must be positive");
  const double rad = std::sqrt(h);
  const double vol = unit_ball_volume(k) * std::pow(rad, k);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < mc_samples; ++i) {
    const PointX<double> alpha = rad * uniform_in_unit_ball<double>(k, *rng);
    const PointX<double> x = y + B * alpha;
    if (window.contains(x)) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(mc_samples);
  return {vol * p, vol * std::sqrt(p * (1.0 - p) / static_cast<double>(mc_samples))};
}

Estimate f1_eval(const AffineFlatd& E, const KernelContext& ctx, Rng& rng) {
  return f1_eval(E, ctx, rng, ctx.inner_samples);
}

Estimate f1_eval(const AffineFlatd& E, const KernelContext& ctx, Rng& rng, std::size_t samples) {
  const auto& P = ctx.params;
  const int d = P.d, k = P.k, j = d - 2 * k;
  if (samples < 2) throw std::invalid_argument("f1_eval: need at least 2 samples");
  if (P.delta == 0.0) return {0.0, 0.0};
  if (E.offset_norm() > ctx.window.circumradius() + 0.5 * P.delta) return {0.0, 0.0};

  const AffineFlatd M = E.direction();
  const PointX<double>& y = E.anchor();
  const double factor = P.t * unit_ball_volume(j) * std::pow(P.delta, j);
  FrameX<double> joint(d, 2 * k);
  joint.leftCols(k) = M.basis();

  std::vector<double> values;
  values.reserve(samples);
  std::size_t attempts = 0;
  while (values.size() < samples) {
    if (++attempts > 100 * samples + 1000)
      throw std::runtime_error("f1_eval: direction model keeps producing parallel subspaces");
    const AffineFlatd L = P.directions.sample(d, k, rng);
    const double det = subspace_determinant(M, L);
    if (!(det > 1e-12)) continue;
    joint.rightCols(k) = L.basis();
    const FrameX<double> wperp = orthogonal_complement<double>(joint);
    const PointX<double> x = P.delta * (wperp * uniform_in_unit_ball<double>(j, rng));
    const PointX<double> shift = y + 0.5 * x;
    const double slice = slice_volume(ctx.window, M, shift, &rng, 16).value;
    values.push_back(factor * det * slice);
  }
  return mean_estimate(values);
}

VarianceEstimate variance_finite_rho(const KernelContext& ctx) {
  const auto& P = ctx.params;
  P.validate();
  const int d = P.d, k = P.k, n = d - k;
  if (ctx.inner_samples < 4 || ctx.outer_samples < 4)
    throw std::invalid_argument("variance_finite_rho: budgets too small");

  VarianceEstimate out;
  const double det_integral = determinant_constant(P);
  out.f2_term = expected_proximity(P, ctx.window, det_integral);
  if (P.delta == 0.0) return out;

  const double Rsup = ctx.window.circumradius() + 0.5 * P.delta;
  const std::size_t outer = ctx.outer_samples;
  const std::size_t strata = std::max<std::size_t>(1, std::min<std::size_t>(64, outer / 8));
  const std::size_t half = ctx.inner_samples / 2;

  std::vector<double> values(outer);
  std::vector<std::size_t> stratum_of(outer);
  for (std::size_t i = 0; i < outer; ++i) stratum_of[i] = i * strata / outer;

  parallel_for(outer, ctx.workers, [&](std::size_t i) {
    Rng rng = make_rng(ctx.seed, {0x7661ULL, i});
    const std::size_t s = stratum_of[i];
    const double r0 = Rsup * std::pow(static_cast<double>(s) / strata, 1.0 / n);
    const double r1 = Rsup * std::pow(static_cast<double>(s + 1) / strata, 1.0 / n);
    const AffineFlatd M = P.directions.sample(d, k, rng);
    const AffineFlatd E = M.translated(offset_in_shell(M, r0, r1, rng));
    const double fa = f1_eval(E, ctx, rng, half).value;
    const double fb = f1_eval(E, ctx, rng, half).value;
    values[i] = fa * fb;
  });

  const double volume = unit_ball_volume(n) * std::pow(Rsup, n);
  CompensatedSum total, var_total;
  for (std::size_t s = 0, begin = 0; s < strata; ++s) {
    std::size_t end = begin;
    while (end < outer && stratum_of[end] == s) ++end;
    const auto sum = summarize(std::span<const double>(values).subspan(begin, end - begin));
    total.add(sum.mean / static_cast<double>(strata));
    var_total.add(sum.mean_se * sum.mean_se / static_cast<double>(strata * strata));
    begin = end;
  }
  out.f1_norm_sq = P.t * volume * total.value();
  out.f1_norm_sq_se = P.t * volume * std::sqrt(var_total.value());
  out.variance = out.f1_norm_sq + out.f2_term;
  out.standard_error = out.f1_norm_sq_se;
  out.budget_exceeded = out.standard_error > 0.05 * out.variance;
  return out;
}

CltBound kolmogorov_bound(const ModelParams& params, const Window& window, double variance) {
  const int d = params.d, k = params.k, j = d - 2 * k;
  const Window K = window.unscaled();
  const double rho = window.scale();
  CltBound b;
  b.variance = variance;
  b.constant_c = params.t * unit_ball_volume(k) * unit_ball_volume(j) * std::pow(params.delta, j) *
                 std::pow(0.5 * K.diameter(), k);
  b.hitting_measure =
      params.t * unit_ball_volume(d - k) * std::pow(K.circumradius() + params.delta, d - k);
  const double C = b.constant_c, T = b.hitting_measure;
  const double r_d = std::pow(rho, d), r_k = std::pow(rho, k);
  b.m11 = std::pow(C, 4) * T * r_d * r_k * r_k * r_k;
  b.m12 = 2.0 * std::pow(C, 4) * T * r_d * r_k * r_k * r_k + std::pow(C, 3) * T * r_d * r_k * r_k;
  b.m22 = 3.0 * std::pow(C, 3) * T * r_d * r_k * r_k + 6.0 * C * C * T * r_d * r_k +
          0.5 * C * T * r_d;
  b.bound = 1088.0 * (std::sqrt(b.m11) + std::sqrt(b.m12) + std::sqrt(b.m22)) / variance;
  return b;
}

CltBound clt_bound(const KernelContext& ctx) {
  return kolmogorov_bound(ctx.params, ctx.window, variance_finite_rho(ctx).variance);
}

Estimate script_I_monte_carlo(const KernelContext& ctx) {
  const auto& P = ctx.params;
  P.validate();
  const int d = P.d, k = P.k;
  const std::size_t outer = ctx.outer_samples;
  const std::size_t inner = std::max<std::size_t>(2, ctx.inner_samples);
  const double Rc = ctx.window.circumradius();
  const double volume = unit_ball_volume(d - k) * std::pow(Rc, d - k);

  std::vector<double> values(outer);
  parallel_for(outer, ctx.workers, [&](std::size_t i) {
    Rng rng = make_rng(ctx.seed, {0x6931ULL, i});
    const AffineFlatd M = P.directions.sample(d, k, rng);
    CompensatedSum a, b, slices;
    for (std::size_t s = 0; s < inner; ++s) {
      a.add(subspace_determinant(M, P.directions.sample(d, k, rng)));
      b.add(subspace_determinant(M, P.directions.sample(d, k, rng)));
      const double r0 = Rc * std::pow(static_cast<double>(s) / inner, 1.0 / (d - k));
      const double r1 = Rc * std::pow(static_cast<double>(s + 1) / inner, 1.0 / (d - k));
      const PointX<double> y = offset_in_shell(M, r0, r1, rng);
      const double v1 = slice_volume(ctx.window, M, y, &rng, 64).value;
      const double v2 = slice_volume(ctx.window, M, y, &rng, 64).value;
      slices.add(v1 * v2);
    }
    const double ni = static_cast<double>(inner);
    values[i] = (a.value() / ni) * (b.value() / ni) * volume * slices.value() / ni;
  });
  return mean_estimate(values);
}

}  // namespace flatprox
