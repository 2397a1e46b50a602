#include "flatprox/window.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "flatprox/closedform.hpp"

namespace flatprox {
namespace {

double parse_number(const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid number in window spec: '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("invalid number in window spec: '" + s + "'");
  return v;
}

void check_scale(double scale) {
  if (!(scale >= 1.0) || !std::isfinite(scale))
    throw std::invalid_argument("window scale rho must be >= 1");
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Window Window::ball(int d, double radius, double scale) {
  if (d < 1) throw std::invalid_argument("window dimension must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("ball radius must be positive");
  check_scale(scale);
  Window w;
  w.shape_ = Shape::ball;
  w.dim_ = d;
  w.radius_ = radius;
  w.scale_ = scale;
  return w;
}

Window Window::box(std::vector<double> halfwidths, double scale) {
  if (halfwidths.empty()) throw std::invalid_argument("box needs at least one halfwidth");
  for (double a : halfwidths)
    if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("box halfwidths must be positive");
  check_scale(scale);
  Window w;
  w.shape_ = Shape::box;
  w.dim_ = static_cast<int>(halfwidths.size());
  w.halfwidths_ = std::move(halfwidths);
  w.scale_ = scale;
  return w;
}

Window Window::parse(const std::string& spec, int d, double scale) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("window spec must be ball:<r> or box:<a1>,...,<ad>");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "ball") return ball(d, parse_number(rest), scale);
  if (kind == "box") {
    std::vector<double> a;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) a.push_back(parse_number(item));
    if (static_cast<int>(a.size()) != d)
      throw std::invalid_argument("box window needs exactly d halfwidths");
    return box(std::move(a), scale);
  }
  throw std::invalid_argument("unknown window shape '" + kind + "'");
}

std::string Window::spec() const {
  if (shape_ == Shape::ball) return "ball:" + format_number(radius_);
  std::string s = "box:";
  for (std::size_t i = 0; i < halfwidths_.size(); ++i) {
    if (i) s += ',';
    s += format_number(halfwidths_[i]);
  }
  return s;
}

Window Window::with_scale(double scale) const {
  check_scale(scale);
  Window w = *this;
  w.scale_ = scale;
  return w;
}

double Window::volume() const {
  if (shape_ == Shape::ball) return unit_ball_volume(dim_) * std::pow(scale_ * radius_, dim_);
  double v = 1.0;
  for (double a : halfwidths_) v *= 2.0 * a * scale_;
  return v;
}

double Window::circumradius() const {
  if (shape_ == Shape::ball) return scale_ * radius_;
  double s = 0.0;
  for (double a : halfwidths_) s += a * a;
  return scale_ * std::sqrt(s);
}

bool Window::contains(const PointX<double>& x) const {
  if (shape_ == Shape::ball) {
    const double r = scale_ * radius_;
    return x.squaredNorm() <= r * r;
  }
  for (int i = 0; i < dim_; ++i)
    if (std::abs(x(i)) > scale_ * halfwidths_[static_cast<std::size_t>(i)]) return false;
  return true;
}

}  // namespace flatprox
