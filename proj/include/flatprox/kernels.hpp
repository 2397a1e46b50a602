#pragma once

// Numerical evaluation of the first chaos kernel f1, the finite-window
// variance ||f1||^2 + 2||f2||^2 and the explicit Kolmogorov bound.

#include <cstddef>
#include <cstdint>

#include "flatprox/closedform.hpp"
#include "flatprox/geometry.hpp"
#include "flatprox/model.hpp"
#include "flatprox/parallel.hpp"
#include "flatprox/random.hpp"
#include "flatprox/window.hpp"

namespace flatprox {

struct KernelContext {
  ModelParams params;
  Window window;  // K_rho, scale included
  std::size_t inner_samples = 100000;  // per f1 evaluation
  std::size_t outer_samples = 10000;   // flats for the ||f1||^2 integral
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

/// k-volume of window ∩ (M + offset), offset in M^perp. Exact for balls and
/// for boxes with k = 1; Monte Carlo (needs rng) for boxes with k >= 2.
Estimate slice_volume(const Window& window, const AffineFlatd& direction,
                      const PointX<double>& offset, Rng* rng = nullptr,
                      std::size_t mc_samples = 512);

/// Monte Carlo estimate of f1(E) = Theta_t({F : pair (E, F) counted}), via the
/// reduction to [M, L] times a slice integral over the delta-ball of (M+L)^perp.
Estimate f1_eval(const AffineFlatd& E, const KernelContext& ctx, Rng& rng);
Estimate f1_eval(const AffineFlatd& E, const KernelContext& ctx, Rng& rng, std::size_t samples);

struct VarianceEstimate {
  double variance = 0.0;  // ||f1||^2 + 2 ||f2||^2
  double standard_error = 0.0;
  double f1_norm_sq = 0.0;
  double f1_norm_sq_se = 0.0;
  double f2_term = 0.0;  // 2 ||f2||^2 == mean proximity
  bool budget_exceeded = false;  // SE above 5% of the estimate
};

/// Finite-window variance of the proximity functional. ||f1||^2 by radially
/// stratified Monte Carlo over flats with offset <= circumradius + delta/2;
/// each integrand value is the product of two independent f1 estimates.
VarianceEstimate variance_finite_rho(const KernelContext& ctx);

struct CltBound {
  double bound = 0.0;
  double m11 = 0.0, m12 = 0.0, m22 = 0.0;
  double constant_c = 0.0;
  double hitting_measure = 0.0;  // Theta_t of flats hitting K + delta-ball (unscaled K)
  double variance = 0.0;
};

/// 1088 (sqrt(M11) + sqrt(M12) + sqrt(M22)) / variance with the closed upper
/// bounds for the M-integrals at window scale rho.
CltBound kolmogorov_bound(const ModelParams& params, const Window& window, double variance);
CltBound clt_bound(const KernelContext& ctx);

/// Monte Carlo evaluation of the general asymptotic-variance integral
/// int_G int_{M^perp} V_k(K ∩ (M+y))^2 dy (int_G [M,L] Q(dL))^2 Q(dM)
/// for the window as given; usable for custom direction models and boxes.
Estimate script_I_monte_carlo(const KernelContext& ctx);

}  // namespace flatprox
