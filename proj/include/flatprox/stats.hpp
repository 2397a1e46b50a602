#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace flatprox {

/// Neumaier-compensated running sum; order of additions is the caller's.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double mean_se = 0.0;
  double variance_se = 0.0;  // from the fourth central moment
};

Summary summarize(std::span<const double> x);

struct CovarianceEstimate {
  double covariance = 0.0;
  double standard_error = 0.0;
  double correlation = 0.0;
};

/// Sample covariance of paired data, its standard error (spread of the
/// centred products over sqrt(n)) and the sample correlation.
CovarianceEstimate covariance(std::span<const double> x, std::span<const double> y);

double normal_cdf(double x);

/// sup_x |ECDF(x) - cdf(x)| over a sorted sample, evaluated on both sides of
/// each step. Correct in the presence of ties.
double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf);

/// KS statistic restricted to [0, cap] for a sample of `n_total` draws of
/// which only the sorted values <= cap were observed.
double ks_statistic_censored(std::span<const double> sorted_observed, std::size_t n_total,
                             double cap, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic (inputs need not be sorted).
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace flatprox
