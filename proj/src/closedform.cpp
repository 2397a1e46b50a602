#include "flatprox/closedform.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "flatprox/window.hpp"

namespace flatprox {
namespace {

void require_isotropic(const ModelParams& params, const char* what) {
  if (!params.directions.is_isotropic())
    throw std::invalid_argument(std::string(what) +
                                " has a closed form only for the isotropic direction model");
}

// Integral over the positive orthant of S^{d-1} of the radial covariogram
// moment, in hyperspherical coordinates. `u` is filled coordinate by
// coordinate; `radius` is the product of sines so far.
double box_sphere_integral(const std::vector<double>& widths, double p, int level,
                           std::vector<double>& u, double radius, double rel_tol) {
  const int d = static_cast<int>(widths.size());
  if (level == d - 1) {
    u[static_cast<std::size_t>(d - 1)] = radius;
    // int_0^rmax r^{p-2} prod_i (w_i - r u_i) dr with w_i = 2 a_i
    double rmax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
      const double ui = u[static_cast<std::size_t>(i)];
      if (ui > 0.0) rmax = std::min(rmax, widths[static_cast<std::size_t>(i)] / ui);
    }
    std::vector<double> coeff(static_cast<std::size_t>(d + 1), 0.0);
    coeff[0] = 1.0;
    for (int i = 0; i < d; ++i) {
      const double w = widths[static_cast<std::size_t>(i)];
      const double ui = u[static_cast<std::size_t>(i)];
      for (int j = i + 1; j >= 1; --j)
        coeff[static_cast<std::size_t>(j)] =
            coeff[static_cast<std::size_t>(j)] * w - coeff[static_cast<std::size_t>(j - 1)] * ui;
      coeff[0] *= w;
    }
    double s = 0.0;
    for (int j = 0; j <= d; ++j) {
      const double e = p - 1.0 + j;
      s += coeff[static_cast<std::size_t>(j)] * std::pow(rmax, e) / e;
    }
    return s;
  }
  const int remaining = d - 2 - level;  // power of sin in the Jacobian
  auto integrand = [&](double phi) {
    u[static_cast<std::size_t>(level)] = radius * std::cos(phi);
    const double sphi = std::sin(phi);
    const double jac = std::pow(sphi, remaining);
    return jac * box_sphere_integral(widths, p, level + 1, u, radius * sphi, rel_tol);
  };
  const int depth = d <= 3 ? 30 : 8;
  return integrate(integrand, 0.0, 0.5 * std::numbers::pi, rel_tol, 0.0, depth).value;
}

}  // namespace

void ModelParams::validate() const {
  if (d < 3 || d > kMaxAmbientDim)
    throw std::invalid_argument("ambient dimension d must lie in [3, " +
                                std::to_string(kMaxAmbientDim) + "]");
  if (k < 1 || 2 * k >= d)
    throw std::invalid_argument("flat dimension must satisfy 1 <= k < d/2 so that flats do not "
                                "intersect (got d=" +
                                std::to_string(d) + ", k=" + std::to_string(k) + ")");
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("intensity t must be positive");
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("threshold delta must be nonnegative");
}

double unit_ball_volume(int n) {
  if (n < 0) throw std::invalid_argument("unit_ball_volume: negative dimension");
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

double psi(int d, int k) {
  return unit_ball_volume(k) * unit_ball_volume(d - k) / (binomial(d, k) * unit_ball_volume(d));
}

double haar_mean_determinant(int d, int k) {
  if (k < 1 || 2 * k > d) throw std::invalid_argument("haar_mean_determinant: need 1 <= k <= d/2");
  return std::exp(2.0 * std::lgamma(0.5 * (d - k + 1)) - std::lgamma(0.5 * (d - 2 * k + 1)) -
                  std::lgamma(0.5 * (d + 1)));
}

Estimate double_determinant_integral(const DirectionModel& model, int d, int k,
                                     std::size_t mc_budget, std::uint64_t seed) {
  if (model.is_isotropic()) return {haar_mean_determinant(d, k), 0.0};
  if (mc_budget < 2) throw std::invalid_argument("determinant integral needs at least 2 samples");
  Rng rng(derive_seed(seed, {0x64657465ULL}));
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < mc_budget; ++i) {
    const auto M = model.sample(d, k, rng);
    const auto L = model.sample(d, k, rng);
    const double x = subspace_determinant(M, L);
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  const double n = static_cast<double>(mc_budget);
  return {mean, std::sqrt(m2 / (n - 1.0) / n)};
}

double determinant_constant(const ModelParams& params) {
  return double_determinant_integral(params.directions, params.d, params.k,
                                     kDefaultDeterminantBudget, 0)
      .value;
}

double expected_proximity(const ModelParams& params, const Window& window, double det_integral) {
  const int j = params.d - 2 * params.k;
  return 0.5 * params.t * params.t * unit_ball_volume(j) * std::pow(params.delta, j) *
         window.volume() * det_integral;
}

double expected_proximity(const ModelParams& params, const Window& window) {
  return expected_proximity(params, window, determinant_constant(params));
}

double chord_power_integral_ball(int d, double p, double r) {
  if (d < 2) throw std::invalid_argument("chord_power_integral_ball: d must be >= 2");
  const double a = 0.5 * (d - 1), b = 0.5 * p + 1.0;
  const double beta = std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  return std::pow(2.0, p) * (d - 1) * unit_ball_volume(d - 1) * std::pow(r, d - 1 + p) * 0.5 *
         beta;
}

QuadratureResult chord_power_integral_box(const std::vector<double>& halfwidths, double p,
                                          double rel_tol) {
  const int d = static_cast<int>(halfwidths.size());
  if (d < 2) throw std::invalid_argument("chord_power_integral_box: d must be >= 2");
  double volume = 1.0;
  for (double a : halfwidths) volume *= 2.0 * a;
  if (p == 1.0) return {volume, 0.0};
  if (!(p > 1.0)) throw std::invalid_argument("chord_power_integral_box: p must be > 1");
  std::vector<double> widths(halfwidths.size());
  for (std::size_t i = 0; i < widths.size(); ++i) widths[i] = 2.0 * halfwidths[i];
  std::vector<double> u(halfwidths.size(), 0.0);
  const double orthant = box_sphere_integral(widths, p, 0, u, 1.0, rel_tol);
  const double surface = d * unit_ball_volume(d);
  const double value = p * (p - 1.0) / surface * std::ldexp(orthant, d);
  return {value, rel_tol * std::abs(value)};
}

double chord_power_integral(const Window& window, double p) {
  if (window.shape() == Window::Shape::ball)
    return chord_power_integral_ball(window.dim(), p, window.scale() * window.radius());
  std::vector<double> a = window.halfwidths();
  for (double& x : a) x *= window.scale();
  const double rel_tol = window.dim() <= 3 ? 1e-9 : 1e-5;
  return chord_power_integral_box(a, p, rel_tol).value;
}

double script_I(const Window& window, int d, int k) {
  const double ps = haar_mean_determinant(d, k);
  return unit_ball_volume(k) / (k + 1) * ps * ps * chord_power_integral(window, k + 1.0);
}

double script_I_direct(const Window& window, int d, int k) {
  if (window.shape() != Window::Shape::ball)
    throw std::invalid_argument("script_I_direct supports ball windows only");
  const double R = window.scale() * window.radius();
  const int n = d - k;
  const double kk = unit_ball_volume(k);
  auto slice_sq = [&](double s) {
    const double v = kk * std::pow(std::max(0.0, R * R - s * s), 0.5 * k);
    return std::pow(s, n - 1) * v * v;
  };
  const double radial = integrate(slice_sq, 0.0, R, 1e-13).value;
  const double ps = haar_mean_determinant(d, k);
  return ps * ps * n * unit_ball_volume(n) * radial;
}

double asymptotic_variance_limit(const ModelParams& params, const Window& window) {
  require_isotropic(params, "asymptotic_variance_limit");
  const int j = params.d - 2 * params.k;
  const double kj = unit_ball_volume(j);
  return std::pow(params.t, 3) * kj * kj * std::pow(params.delta, 2 * j) *
         script_I(window.unscaled(), params.d, params.k);
}

double beta_small(const ModelParams& params, const Window& window, double det_integral) {
  const int j = params.d - 2 * params.k;
  return 0.5 * params.t * params.t * unit_ball_volume(j) * window.unscaled().volume() *
         det_integral;
}

double beta_small(const ModelParams& params, const Window& window) {
  return beta_small(params, window, determinant_constant(params));
}

double beta_sigma(const ModelParams& params, const Window& window, double sigma,
                  double det_integral) {
  if (!(sigma > 0.0)) throw std::invalid_argument("beta_sigma: sigma must be positive");
  const int j = params.d - 2 * params.k;
  return 0.5 * params.t * params.t * j * unit_ball_volume(j) * std::pow(sigma, j - 1) *
         window.unscaled().volume() * det_integral;
}

double beta_sigma(const ModelParams& params, const Window& window, double sigma) {
  return beta_sigma(params, window, sigma, determinant_constant(params));
}

double poisson_tail(int m, double lambda) {
  if (m < 1) throw std::invalid_argument("poisson_tail: m must be >= 1");
  double term = std::exp(-lambda);
  double sum = term;
  for (int i = 1; i < m; ++i) {
    term *= lambda / i;
    sum += term;
  }
  return std::min(1.0, sum);
}

double limiting_tail_small(int m, double u, double beta, int d, int k) {
  if (!(u >= 0.0)) throw std::invalid_argument("limiting_tail_small: u must be >= 0");
  return poisson_tail(m, beta * std::pow(u, d - 2 * k));
}

double limiting_tail_sigma(int m, double u, double beta) {
  if (!(u >= 0.0)) throw std::invalid_argument("limiting_tail_sigma: u must be >= 0");
  return poisson_tail(m, beta * u);
}

double shell_lower(int n, double r) { return 2.0 * (3.0 * n - 1.0) * r; }
double shell_upper(int n, double r) { return 6.0 * n * r; }

double shell_mean(int n, double r, const ModelParams& params, double det_integral) {
  if (n < 1) throw std::invalid_argument("shell_mean: n must be >= 1");
  ModelParams unit = params;
  unit.delta = 1.0;
  const double c1 = expected_proximity(unit, Window::ball(params.d, r), det_integral);
  const int j = params.d - 2 * params.k;
  return c1 * (std::pow(shell_upper(n, r), j) - std::pow(shell_lower(n, r), j));
}

double shell_mean(int n, double r, const ModelParams& params) {
  return shell_mean(n, r, params, determinant_constant(params));
}

}  // namespace flatprox
