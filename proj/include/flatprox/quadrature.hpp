#pragma once

#include <array>
#include <cmath>
#include <limits>

namespace flatprox {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
QuadratureResult gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[static_cast<std::size_t>(j)];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[static_cast<std::size_t>(j)] * s;
    if (j % 2 == 1) gauss += kWg[static_cast<std::size_t>(j / 2)] * s;
  }
  return {kron * h, std::abs((kron - gauss) * h)};
}

template <typename F>
QuadratureResult adaptive(F& f, double a, double b, double abs_tol, double rel_tol,
                          QuadratureResult whole, int depth) {
  const double tol = std::max(abs_tol, rel_tol * std::abs(whole.value));
  if (whole.error <= tol || depth <= 0) return whole;
  const double m = 0.5 * (a + b);
  const auto left = gk15(f, a, m);
  const auto right = gk15(f, m, b);
  const auto l = adaptive(f, a, m, 0.5 * abs_tol, rel_tol, left, depth - 1);
  const auto r = adaptive(f, m, b, 0.5 * abs_tol, rel_tol, right, depth - 1);
  return {l.value + r.value, l.error + r.error};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
template <typename F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-12,
                           double abs_tol = 1e-300, int max_depth = 40) {
  if (!(b > a)) return {0.0, 0.0};
  auto whole = detail::gk15(f, a, b);
  return detail::adaptive(f, a, b, abs_tol, rel_tol, whole, max_depth);
}

}  // namespace flatprox
