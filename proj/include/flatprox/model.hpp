#pragma once

#include <functional>
#include <memory>
#include <string>

#include "flatprox/geometry.hpp"
#include "flatprox/random.hpp"

namespace flatprox {

/// Directional distribution Q of the flat process.
///
/// Custom samplers must return a canonical direction space (orthonormal basis,
/// zero anchor) of dimension k in R^d, and the law must be non-atomic so that
/// two independent draws are in general position almost surely. Near-parallel
/// pairs produced by a bad sampler are counted downstream, never dropped
/// silently.
class DirectionModel {
 public:
  using Sampler = std::function<AffineFlatd(int d, int k, Rng& rng)>;

  static DirectionModel isotropic() { return DirectionModel{}; }
  static DirectionModel custom(std::string name, Sampler sampler) {
    DirectionModel m;
    m.name_ = std::move(name);
    m.sampler_ = std::make_shared<const Sampler>(std::move(sampler));
    return m;
  }

  /// span(e_1..e_k) perturbed by `spread` times a Gaussian matrix, then
  /// orthonormalized. Concentrates near one direction as spread -> 0.
  static DirectionModel perturbed_axis(double spread) {
    return custom("perturbed_axis", [spread](int d, int k, Rng& rng) {
      FrameX<double> g = spread * gaussian_frame<double>(d, k, rng);
      g.topLeftCorner(k, k) += FrameX<double>::Identity(k, k);
      return canonicalize<double>(g, PointX<double>::Zero(d));
    });
  }

  bool is_isotropic() const { return sampler_ == nullptr; }
  const std::string& name() const { return name_; }

  AffineFlatd sample(int d, int k, Rng& rng) const {
    if (!sampler_) return haar_grassmannian_sample<double>(d, k, rng);
    return (*sampler_)(d, k, rng);
  }

 private:
  std::string name_ = "isotropic";
  std::shared_ptr<const Sampler> sampler_;
};

/// Process and functional parameters (d, k, t, delta, Q).
struct ModelParams {
  int d = 3;
  int k = 1;
  double t = 1.0;
  double delta = 1.0;
  DirectionModel directions = DirectionModel::isotropic();

  /// Throws std::invalid_argument unless 1 <= k < d/2, t > 0 and delta >= 0.
  void validate() const;
};

}  // namespace flatprox
