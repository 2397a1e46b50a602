#include "flatprox/process.hpp"

#include <cmath>
#include <stdexcept>

#include "flatprox/closedform.hpp"

namespace flatprox {

double hitting_mean(double R, const ModelParams& params) {
  if (!(R > 0.0)) throw std::invalid_argument("hitting_mean: R must be positive");
  const int n = params.d - params.k;
  return params.t * unit_ball_volume(n) * std::pow(R, n);
}

double enclosing_radius_for_proximity(const Window& window, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("enclosing radius: delta must be >= 0");
  return (window.circumradius() + 0.5 * delta) * (1.0 + 1e-9);
}

FlatProcessSample sample_process(const SampleRegion& region, const ModelParams& params, Rng& rng) {
  params.validate();
  const double R = region.enclosing_radius;
  const int d = params.d, k = params.k;

  FlatProcessSample out;
  out.region = region;
  out.params = params;

  std::poisson_distribution<long long> count(hitting_mean(R, params));
  const long long n = count(rng);
  out.flats.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    const AffineFlatd dir = params.directions.sample(d, k, rng);
    const FrameX<double> perp = orthogonal_complement<double>(dir.basis());
    const PointX<double> offset = R * uniform_in_unit_ball<double>(d - k, rng);
    PointX<double> anchor = perp * offset;
    out.flats.push_back(AffineFlatd::from_canonical(dir.basis(), std::move(anchor)));
  }
  return out;
}

}  // namespace flatprox
