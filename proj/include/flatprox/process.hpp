#pragma once

#include <cstdint>
#include <vector>

#include "flatprox/geometry.hpp"
#include "flatprox/model.hpp"
#include "flatprox/random.hpp"
#include "flatprox/window.hpp"

namespace flatprox {

/// Centred ball B_R; the sample contains exactly the process flats hitting it.
struct SampleRegion {
  double enclosing_radius = 1.0;
};

/// Restriction of the Poisson k-flat process to the flats hitting a ball.
struct FlatProcessSample {
  std::vector<AffineFlatd> flats;
  SampleRegion region;
  ModelParams params;
  std::int64_t rejected_parallel_pairs = 0;
};

/// Mean number of flats hitting B_R: t kappa_{d-k} R^{d-k}.
double hitting_mean(double R, const ModelParams& params);

/// Smallest sampling radius that sees every pair with midpoint in the window
/// and distance <= delta: circumradius + delta/2, padded by 1e-9 relative.
double enclosing_radius_for_proximity(const Window& window, double delta);

/// Draws N ~ Poisson(hitting_mean) flats with independent directions from the
/// model and offsets uniform in the (d-k)-ball of radius R inside L^perp.
FlatProcessSample sample_process(const SampleRegion& region, const ModelParams& params, Rng& rng);

}  // namespace flatprox
