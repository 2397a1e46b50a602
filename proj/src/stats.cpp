#include "flatprox/stats.hpp"

#include <stdexcept>

namespace flatprox {

Summary summarize(std::span<const double> x) {
  Summary s;
  s.n = x.size();
  if (s.n == 0) return s;
  CompensatedSum sum;
  for (double v : x) sum.add(v);
  s.mean = sum.value() / static_cast<double>(s.n);
  if (s.n < 2) return s;
  CompensatedSum m2, m4;
  for (double v : x) {
    const double c = v - s.mean;
    m2.add(c * c);
    m4.add(c * c * c * c);
  }
  const double n = static_cast<double>(s.n);
  s.variance = m2.value() / (n - 1.0);
  s.mean_se = std::sqrt(s.variance / n);
  const double mu4 = m4.value() / n;
  const double var_of_var = (mu4 - (n - 3.0) / (n - 1.0) * s.variance * s.variance) / n;
  s.variance_se = std::sqrt(std::max(0.0, var_of_var));
  return s;
}

CovarianceEstimate covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("covariance: need two equally sized samples of size >= 2");
  const auto sx = summarize(x);
  const auto sy = summarize(y);
  const double n = static_cast<double>(x.size());
  std::vector<double> prod(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) prod[i] = (x[i] - sx.mean) * (y[i] - sy.mean);
  const auto sp = summarize(prod);
  CovarianceEstimate out;
  out.covariance = sp.mean * n / (n - 1.0);
  out.standard_error = sp.mean_se;
  const double denom = std::sqrt(sx.variance * sy.variance);
  out.correlation = denom > 0.0 ? out.covariance / denom : 0.0;
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf) {
  const std::size_t n = sorted.size();
  if (n == 0) throw std::invalid_argument("ks_statistic: empty sample");
  const double nn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / nn - f, f - static_cast<double>(i) / nn});
  }
  return d;
}

double ks_statistic_censored(std::span<const double> sorted_observed, std::size_t n_total,
                             double cap, const std::function<double(double)>& cdf) {
  if (n_total == 0) throw std::invalid_argument("ks_statistic_censored: empty sample");
  if (sorted_observed.size() > n_total)
    throw std::invalid_argument("ks_statistic_censored: more observations than draws");
  const double nn = static_cast<double>(n_total);
  double d = 0.0;
  for (std::size_t i = 0; i < sorted_observed.size(); ++i) {
    if (sorted_observed[i] > cap)
      throw std::invalid_argument("ks_statistic_censored: observation above the cap");
    const double f = cdf(sorted_observed[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / nn - f, f - static_cast<double>(i) / nn});
  }
  return std::max(d, cdf(cap) - static_cast<double>(sorted_observed.size()) / nn);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("log_log_slope: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace flatprox
