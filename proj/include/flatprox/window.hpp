#pragma once

#include <string>
#include <vector>

#include "flatprox/geometry.hpp"

namespace flatprox {

/// Observation body K scaled by rho >= 1: a centred ball or a centred
/// axis-aligned box.
class Window {
 public:
  enum class Shape { ball, box };

  static Window ball(int d, double radius, double scale = 1.0);
  static Window box(std::vector<double> halfwidths, double scale = 1.0);

  /// Parses `ball:<r>` or `box:<a1>,...,<ad>`. A ball needs the ambient dimension.
  static Window parse(const std::string& spec, int d, double scale = 1.0);
  /// Inverse of parse (scale is not part of the spec string).
  std::string spec() const;

  Shape shape() const { return shape_; }
  int dim() const { return dim_; }
  double scale() const { return scale_; }
  double radius() const { return radius_; }  // unscaled, ball only
  const std::vector<double>& halfwidths() const { return halfwidths_; }  // unscaled, box only

  Window with_scale(double scale) const;
  Window unscaled() const { return with_scale(1.0); }

  /// Ambient volume V_d of the scaled body.
  double volume() const;
  /// Radius of the smallest centred ball containing the scaled body.
  double circumradius() const;
  double diameter() const { return 2.0 * circumradius(); }

  bool contains(const PointX<double>& x) const;

 private:
  Shape shape_ = Shape::ball;
  int dim_ = 0;
  double scale_ = 1.0;
  double radius_ = 1.0;
  std::vector<double> halfwidths_;
};

}  // namespace flatprox
