#include "doctest.h"

#include <numbers>

#include "flatprox/window.hpp"

using namespace flatprox;

TEST_CASE("window specs round trip") {
  const auto b = Window::parse("ball:1.5", 3);
  CHECK(b.shape() == Window::Shape::ball);
  CHECK(b.radius() == 1.5);
  CHECK(Window::parse(b.spec(), 3).radius() == 1.5);

  const auto x = Window::parse("box:1,2,0.25", 3, 2.0);
  CHECK(x.shape() == Window::Shape::box);
  CHECK(x.halfwidths() == std::vector<double>{1.0, 2.0, 0.25});
  CHECK(x.scale() == 2.0);
  const auto y = Window::parse(x.spec(), 3);
  CHECK(y.halfwidths() == x.halfwidths());
}

TEST_CASE("invalid window specs") {
  CHECK_THROWS_AS(Window::parse("ball", 3), std::invalid_argument);
  CHECK_THROWS_AS(Window::parse("ball:-1", 3), std::invalid_argument);
  CHECK_THROWS_AS(Window::parse("ball:1x", 3), std::invalid_argument);
  CHECK_THROWS_AS(Window::parse("box:1,2", 3), std::invalid_argument);
  CHECK_THROWS_AS(Window::parse("box:1,0,1", 3), std::invalid_argument);
  CHECK_THROWS_AS(Window::parse("cube:1", 3), std::invalid_argument);
  CHECK_THROWS_AS(Window::ball(3, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("volume, circumradius and containment") {
  const auto b = Window::ball(3, 1.0, 2.0);
  CHECK(b.volume() == doctest::Approx(4.0 * std::numbers::pi / 3.0 * 8.0));
  CHECK(b.circumradius() == doctest::Approx(2.0));
  CHECK(b.diameter() == doctest::Approx(4.0));
  PointX<double> p(3);
  p << 1.9, 0.0, 0.0;
  CHECK(b.contains(p));
  p << 1.5, 1.5, 0.0;
  CHECK_FALSE(b.contains(p));
  CHECK(b.unscaled().scale() == 1.0);
  CHECK(b.with_scale(3.0).circumradius() == doctest::Approx(3.0));

  const auto x = Window::box({1.0, 2.0, 3.0}, 2.0);
  CHECK(x.volume() == doctest::Approx(48.0 * 8.0));
  CHECK(x.circumradius() == doctest::Approx(2.0 * std::sqrt(14.0)));
  p << 1.9, 3.9, -5.9;
  CHECK(x.contains(p));
  p << 2.1, 0.0, 0.0;
  CHECK_FALSE(x.contains(p));
}
