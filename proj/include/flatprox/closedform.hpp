#pragma once

// Closed-form constants of the proximity functional and its limit laws.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "flatprox/model.hpp"
#include "flatprox/quadrature.hpp"

namespace flatprox {

class Window;

/// Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// kappa_n = pi^{n/2} / Gamma(n/2 + 1).
double unit_ball_volume(int n);

double binomial(int n, int k);

/// kappa_k kappa_{d-k} / (C(d,k) kappa_d). This is the mean of [L, M] for a
/// Haar k-subspace L and an independent Haar (d-k)-subspace M; it is not the
/// mean for two k-subspaces when 2k < d (see haar_mean_determinant).
double psi(int d, int k);

/// Mean of [M, L] for two independent Haar k-subspaces of R^d:
/// Gamma((d-k+1)/2)^2 / (Gamma((d-2k+1)/2) Gamma((d+1)/2)).
double haar_mean_determinant(int d, int k);

/// Double integral of [M, L] under Q x Q. Exact (haar_mean_determinant) for
/// the isotropic model, Monte Carlo with standard error for custom samplers.
Estimate double_determinant_integral(const DirectionModel& model, int d, int k,
                                     std::size_t mc_budget, std::uint64_t seed);

inline constexpr std::size_t kDefaultDeterminantBudget = 200000;

/// double_determinant_integral(...).value with default budget and seed 0.
double determinant_constant(const ModelParams& params);

/// Mean of the proximity functional over the (scaled) window.
double expected_proximity(const ModelParams& params, const Window& window);
double expected_proximity(const ModelParams& params, const Window& window, double det_integral);

/// Order-p chord-power integral of the d-ball of radius r, for line measure
/// normalized as (probability on directions) x (Lebesgue on the complement).
double chord_power_integral_ball(int d, double p, double r);

/// Same integral for a centred box with the given halfwidths, via the
/// covariogram representation and nested adaptive quadrature over the sphere.
/// Requires p > 1 (p == 1 returns the volume exactly).
QuadratureResult chord_power_integral_box(const std::vector<double>& halfwidths, double p,
                                          double rel_tol = 1e-8);

/// Chord-power integral of the window as given (including its scale).
double chord_power_integral(const Window& window, double p);

/// (kappa_k / (k+1)) m^2 J_{k+1}(K) for the window as given, with
/// m = haar_mean_determinant(d, k). Isotropic only.
double script_I(const Window& window, int d, int k);

/// The same quantity from the slice-volume integral
/// m^2 * int_{M^perp} V_k(K cap (M+y))^2 dy, by 1-D radial quadrature.
/// Ball windows only; an independent route to script_I.
double script_I_direct(const Window& window, int d, int k);

/// Limit of Var(pi) / rho^{d+k}; uses the unscaled window. Isotropic only.
double asymptotic_variance_limit(const ModelParams& params, const Window& window);

/// Intensity constant of the small-distance limit (unscaled window).
double beta_small(const ModelParams& params, const Window& window);
double beta_small(const ModelParams& params, const Window& window, double det_integral);

/// Intensity of the homogeneous limit around sigma (unscaled window).
double beta_sigma(const ModelParams& params, const Window& window, double sigma);
double beta_sigma(const ModelParams& params, const Window& window, double sigma,
                  double det_integral);

/// P(Poisson(lambda) < m).
double poisson_tail(int m, double lambda);

/// Limit of P(rho^{d/(d-2k)} D_m > u).
double limiting_tail_small(int m, double u, double beta, int d, int k);

/// Limit of P(rho^d (Dbar_m - sigma) > u) and of P(-rho^d (Dunder_m - sigma) > u).
double limiting_tail_sigma(int m, double u, double beta);

/// Shell bounds a_n = 2(3n-1) r and b_n = 6 n r.
double shell_lower(int n, double r);
double shell_upper(int n, double r);

/// E S_n = c_1 (b_n^{d-2k} - a_n^{d-2k}) with c_1 the mean proximity of B_r at delta = 1.
double shell_mean(int n, double r, const ModelParams& params);
double shell_mean(int n, double r, const ModelParams& params, double det_integral);

}  // namespace flatprox
