#include "flatprox/experiments.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "flatprox/closedform.hpp"
#include "flatprox/kernels.hpp"
#include "flatprox/parallel.hpp"
#include "flatprox/process.hpp"
#include "flatprox/proximity.hpp"
#include "flatprox/random.hpp"
#include "flatprox/stats.hpp"

namespace flatprox {
namespace {

using json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxCensoredFraction = 0.01;
constexpr std::uint64_t kKernelStream = 0x6b65726eULL;

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

std::string interval_name(const char* prefix, double a, double b) {
  return std::string(prefix) + "(" + fmt(a) + "," + fmt(b) + "]";
}

template <typename T, typename F>
std::vector<T> replicate(const ExperimentConfig& c, std::size_t rho_index, F&& per_rep) {
  std::vector<T> out(c.replications);
  parallel_for(c.replications, c.workers, [&](std::size_t r) {
    Rng rng = make_rng(c.seed, {static_cast<std::uint64_t>(rho_index), static_cast<std::uint64_t>(r)});
    out[r] = per_rep(rng);
  });
  return out;
}

ExperimentReport start_report(const ExperimentConfig& config, std::vector<std::string> columns) {
  config.validate();
  ExperimentReport report;
  report.estimand = config.estimand;
  report.config = config;
  report.sample_columns = std::move(columns);
  return report;
}

void fill_summary(RhoReport& rr, std::span<const double> values) {
  const auto s = summarize(values);
  rr.replications = s.n;
  rr.mean = s.mean;
  rr.variance = s.variance;
  rr.mean_se = s.mean_se;
  rr.variance_se = s.variance_se;
}

void finish(ExperimentReport& report) {
  Verdict v = combine(report.checks);
  for (const auto& rr : report.per_rho) v = combine(rr.checks, v);
  report.verdict = v;
  if (!report.config.keep_samples)
    for (auto& rr : report.per_rho) rr.samples.clear();
}

// Failed distribution checks under heavy censoring are inconclusive.
void apply_censoring(RhoReport& rr) {
  const double frac = static_cast<double>(rr.censored) / static_cast<double>(rr.replications);
  auto c = Check::make("censored_fraction", frac, kMaxCensoredFraction, 0.0, Check::Rule::below);
  if (c.verdict == Verdict::fail) {
    c.verdict = Verdict::inconclusive;
    for (auto& other : rr.checks)
      if (other.verdict == Verdict::fail) other.verdict = Verdict::inconclusive;
  }
  rr.checks.push_back(c);
}

std::vector<double> bin_edges(const ExperimentConfig& c) {
  std::vector<double> edges = c.u_grid;
  if (edges.empty())
    for (int i = 1; i <= 4; ++i) edges.push_back(c.u_max * i / 4.0);
  if (edges.front() > 0.0) edges.insert(edges.begin(), 0.0);
  return edges;
}

struct CountDraw {
  double value = 0.0;
  std::int64_t rejected = 0;
};

std::vector<CountDraw> simulate_counts(const ExperimentConfig& c, std::size_t ri, const Window& K) {
  const SampleRegion region{enclosing_radius_for_proximity(K, c.params.delta)};
  return replicate<CountDraw>(c, ri, [&](Rng& rng) {
    const auto sample = sample_process(region, c.params, rng);
    const auto pc = proximity_count(sample, K, c.params.delta, kGeneralPositionTol,
                                    PairEnumeration::pruned);
    return CountDraw{static_cast<double>(pc.count), pc.rejected_parallel_pairs};
  });
}

std::vector<double> values_of(const std::vector<CountDraw>& draws, std::int64_t& rejected) {
  std::vector<double> v(draws.size());
  rejected = 0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    v[i] = draws[i].value;
    rejected += draws[i].rejected;
  }
  return v;
}

KernelContext kernel_context(const ExperimentConfig& c, std::size_t ri, const Window& K) {
  KernelContext ctx;
  ctx.params = c.params;
  ctx.window = K;
  ctx.inner_samples = c.kernel_inner;
  ctx.outer_samples = c.kernel_outer;
  ctx.seed = derive_seed(c.seed, {kKernelStream, static_cast<std::uint64_t>(ri)});
  ctx.workers = c.workers;
  return ctx;
}

// Mean/count check with a 3-standard-error band.
Check mean_check(std::string name, std::span<const double> values, double expected) {
  const auto s = summarize(values);
  return Check::make(std::move(name), s.mean, expected, 3.0 * s.mean_se);
}

Check covariance_check(std::string name, std::span<const double> x, std::span<const double> y) {
  const auto cv = covariance(x, y);
  return Check::make(std::move(name), cv.covariance, 0.0, 3.0 * cv.standard_error);
}

double limit_for(const ExperimentConfig& c) {
  if (c.params.directions.is_isotropic()) return asymptotic_variance_limit(c.params, c.window);
  KernelContext ctx = kernel_context(c, 0, c.window);
  ctx.seed = derive_seed(c.seed, {kKernelStream, 0x6c696dULL});
  const int j = c.params.d - 2 * c.params.k;
  const double kj = unit_ball_volume(j);
  return std::pow(c.params.t, 3) * kj * kj * std::pow(c.params.delta, 2 * j) *
         script_I_monte_carlo(ctx).value;
}

std::vector<double> observed_sorted(const std::vector<double>& values, double cap) {
  std::vector<double> out;
  for (double v : values)
    if (v <= cap) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

double tail_fraction(const std::vector<double>& values, double u) {
  std::size_t above = 0;
  for (double v : values)
    if (v > u) ++above;
  return static_cast<double>(above) / static_cast<double>(values.size());
}

}  // namespace

std::string to_string(Estimand e) {
  switch (e) {
    case Estimand::mean: return "mean";
    case Estimand::variance: return "variance";
    case Estimand::clt: return "clt";
    case Estimand::extremes: return "extremes";
    case Estimand::sigma: return "sigma";
    case Estimand::shells: return "shells";
  }
  return "unknown";
}

Estimand parse_estimand(const std::string& name) {
  for (auto e : {Estimand::mean, Estimand::variance, Estimand::clt, Estimand::extremes,
                 Estimand::sigma, Estimand::shells})
    if (to_string(e) == name) return e;
  throw std::invalid_argument("unknown estimand '" + name + "'");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  params.validate();
  if (window.dim() != params.d)
    throw std::invalid_argument("window dimension does not match d");
  if (window.scale() != 1.0) throw std::invalid_argument("config window must be unscaled");
  if (rho_grid.empty()) throw std::invalid_argument("rho grid is empty");
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] >= 1.0)) throw std::invalid_argument("rho values must be >= 1");
    if (i > 0 && !(rho_grid[i] > rho_grid[i - 1]))
      throw std::invalid_argument("rho grid must be strictly increasing");
  }
  if (replications < 2) throw std::invalid_argument("need at least 2 replications");
  if (!std::is_sorted(u_grid.begin(), u_grid.end()) ||
      std::adjacent_find(u_grid.begin(), u_grid.end()) != u_grid.end())
    throw std::invalid_argument("u grid must be strictly increasing");
  if (!u_grid.empty() && u_grid.front() < 0.0)
    throw std::invalid_argument("u grid must be nonnegative");
  if (estimand == Estimand::extremes || estimand == Estimand::sigma) {
    if (m < 1) throw std::invalid_argument("order m must be >= 1");
    if (!(u_max > 0.0)) throw std::invalid_argument("u_max must be positive");
    if (!u_grid.empty() && u_grid.back() > u_max)
      throw std::invalid_argument("u grid exceeds u_max");
    if (!u_grid.empty() && u_grid.back() == 0.0)
      throw std::invalid_argument("u grid needs a positive point");
  }
  if (estimand == Estimand::sigma && !(sigma > 0.0))
    throw std::invalid_argument("sigma must be positive");
  if (estimand == Estimand::shells) {
    if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
    if (window.shape() != Window::Shape::ball)
      throw std::invalid_argument("shell experiment needs a ball window");
  }
  if ((estimand == Estimand::variance || estimand == Estimand::clt) &&
      (kernel_inner < 4 || kernel_outer < 4))
    throw std::invalid_argument("kernel budgets too small");
}

Check Check::make(std::string name, double value, double reference, double tolerance, Rule rule) {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.reference = reference;
  c.tolerance = tolerance;
  c.rule = rule;
  bool ok = false;
  switch (rule) {
    case Rule::within: ok = std::abs(value - reference) <= tolerance; break;
    case Rule::below: ok = value < reference; break;
    case Rule::at_most: ok = value <= reference; break;
  }
  c.verdict = ok ? Verdict::pass : Verdict::fail;
  return c;
}

Verdict combine(const std::vector<Check>& checks, Verdict start) {
  Verdict v = start;
  for (const auto& c : checks) {
    if (c.verdict == Verdict::fail) return Verdict::fail;
    if (c.verdict == Verdict::inconclusive) v = Verdict::inconclusive;
  }
  return v;
}

ExperimentReport run_mean_experiment(const ExperimentConfig& config) {
  auto report = start_report(config, {"proximity"});
  const double det = determinant_constant(config.params);
  for (std::size_t ri = 0; ri < config.rho_grid.size(); ++ri) {
    const Window K = config.window.with_scale(config.rho_grid[ri]);
    RhoReport rr;
    rr.rho = config.rho_grid[ri];
    const auto values = values_of(simulate_counts(config, ri, K), rr.rejected_parallel_pairs);
    fill_summary(rr, values);
    const double expected = expected_proximity(config.params, K, det);
    rr.metrics.emplace_back("expected", expected);
    rr.metrics.emplace_back("z", rr.mean_se > 0 ? (rr.mean - expected) / rr.mean_se : 0.0);
    rr.checks.push_back(mean_check("mean", values, expected));
    rr.samples = {values};
    report.per_rho.push_back(std::move(rr));
  }
  finish(report);
  return report;
}

ExperimentReport run_variance_experiment(const ExperimentConfig& config) {
  auto report = start_report(config, {"proximity"});
  const auto& P = config.params;
  const double det = determinant_constant(P);
  double last_normalized = 0.0;
  for (std::size_t ri = 0; ri < config.rho_grid.size(); ++ri) {
    const double rho = config.rho_grid[ri];
    const Window K = config.window.with_scale(rho);
    RhoReport rr;
    rr.rho = rho;
    const auto values = values_of(simulate_counts(config, ri, K), rr.rejected_parallel_pairs);
    fill_summary(rr, values);
    const auto kernel = variance_finite_rho(kernel_context(config, ri, K));
    const double norm = std::pow(rho, P.d + P.k);
    last_normalized = rr.variance / norm;
    rr.metrics.emplace_back("expected_mean", expected_proximity(P, K, det));
    rr.metrics.emplace_back("kernel_variance", kernel.variance);
    rr.metrics.emplace_back("kernel_se", kernel.standard_error);
    rr.metrics.emplace_back("f1_norm_sq", kernel.f1_norm_sq);
    rr.metrics.emplace_back("f2_term", kernel.f2_term);
    rr.metrics.emplace_back("normalized_variance", last_normalized);
    rr.metrics.emplace_back("normalized_kernel_variance", kernel.variance / norm);
    rr.metrics.emplace_back("variance_over_mean", rr.mean > 0 ? rr.variance / rr.mean : 0.0);
    rr.checks.push_back(
        Check::make("variance_vs_kernel", rr.variance, kernel.variance,
                    3.0 * std::hypot(rr.variance_se, kernel.standard_error)));
    auto precision = Check::make("kernel_relative_se",
                                 kernel.variance > 0 ? kernel.standard_error / kernel.variance : 0.0,
                                 0.02, 0.0, Check::Rule::below);
    if (precision.verdict == Verdict::fail) precision.verdict = Verdict::inconclusive;
    rr.checks.push_back(precision);
    rr.samples = {values};
    report.per_rho.push_back(std::move(rr));
  }
  const double limit = limit_for(config);
  auto rel = Check::make("limit_relative_error", std::abs(last_normalized - limit) / limit, 0.15,
                         0.0, Check::Rule::below);
  report.checks.push_back(rel);
  report.per_rho.back().metrics.emplace_back("variance_limit", limit);
  finish(report);
  return report;
}

ExperimentReport run_clt_experiment(const ExperimentConfig& config) {
  auto report = start_report(config, {"proximity", "standardized"});
  const auto& P = config.params;
  const double det = determinant_constant(P);
  std::vector<double> distances;
  for (std::size_t ri = 0; ri < config.rho_grid.size(); ++ri) {
    const double rho = config.rho_grid[ri];
    const Window K = config.window.with_scale(rho);
    RhoReport rr;
    rr.rho = rho;
    const auto values = values_of(simulate_counts(config, ri, K), rr.rejected_parallel_pairs);
    fill_summary(rr, values);
    const double mean = expected_proximity(P, K, det);
    const auto kernel = variance_finite_rho(kernel_context(config, ri, K));
    const double sd = std::sqrt(kernel.variance);
    std::vector<double> z(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - mean) / sd;
    std::vector<double> sorted = z;
    std::sort(sorted.begin(), sorted.end());
    const double dist = ks_statistic(sorted, normal_cdf);
    const auto bound = kolmogorov_bound(P, K, kernel.variance);
    distances.push_back(dist);
    rr.metrics.emplace_back("expected_mean", mean);
    rr.metrics.emplace_back("kernel_variance", kernel.variance);
    rr.metrics.emplace_back("kernel_se", kernel.standard_error);
    rr.metrics.emplace_back("kolmogorov_distance", dist);
    rr.metrics.emplace_back("kolmogorov_bound", bound.bound);
    rr.checks.push_back(mean_check("standardized_mean", z, 0.0));
    rr.checks.push_back(Check::make("bound_dominates", dist, bound.bound, 0.0, Check::Rule::at_most));
    rr.samples = {values, z};
    report.per_rho.push_back(std::move(rr));
  }
  double inversions = 0.0, worst = 0.0;
  for (std::size_t i = 1; i < distances.size(); ++i) {
    if (distances[i] >= distances[i - 1]) {
      inversions += 1.0;
      worst = std::max(worst, distances[i] - distances[i - 1]);
    }
  }
  report.checks.push_back(Check::make("distance_inversions", inversions, 1.0, 0.0, Check::Rule::at_most));
  report.checks.push_back(Check::make("inversion_size", worst,
                                      2.0 * kolmogorov_noise(config.replications), 0.0,
                                      Check::Rule::at_most));
  if (distances.size() >= 2)
    report.checks.push_back(Check::make("log_log_slope", log_log_slope(config.rho_grid, distances),
                                        0.0, 0.0, Check::Rule::at_most));
  report.checks.push_back(
      Check::make("final_distance", distances.back(), 0.1, 0.0, Check::Rule::below));
  finish(report);
  return report;
}

ExperimentReport run_extremes_experiment(const ExperimentConfig& config) {
  auto report = start_report(config, {"d_m", "d_1", "count"});
  const auto& P = config.params;
  const int j = P.d - 2 * P.k;
  const double gamma = static_cast<double>(P.d) / j;
  const double beta = beta_small(P, config.window);
  const auto edges = bin_edges(config);
  const std::size_t bins = edges.size() - 1;

  struct Draw {
    double d_m = kInf, d_1 = kInf;
    std::vector<double> counts;
    std::int64_t rejected = 0;
  };

  for (std::size_t ri = 0; ri < config.rho_grid.size(); ++ri) {
    const double rho = config.rho_grid[ri];
    const Window K = config.window.with_scale(rho);
    const double scale = std::pow(rho, gamma);
    const double cap = config.u_max / scale;
    const SampleRegion region{enclosing_radius_for_proximity(K, cap)};
    const auto draws = replicate<Draw>(config, ri, [&](Rng& rng) {
      const auto sample = sample_process(region, P, rng);
      const auto ordered =
          distance_point_process(sample, K, cap, kGeneralPositionTol, PairEnumeration::pruned);
      Draw d;
      d.rejected = ordered.rejected_parallel_pairs;
      if (auto v = mth_smallest(ordered, config.m)) d.d_m = scale * *v;
      if (auto v = mth_smallest(ordered, 1)) d.d_1 = scale * *v;
      d.counts.assign(bins, 0.0);
      for (const auto& rec : ordered.records) {
        const double x = scale * rec.distance;
        for (std::size_t b = 0; b < bins; ++b)
          if (x > edges[b] && x <= edges[b + 1]) d.counts[b] += 1.0;
      }
      return d;
    });

    RhoReport rr;
    rr.rho = rho;
    std::vector<double> d_m(draws.size()), d_1(draws.size()), total(draws.size());
    std::vector<std::vector<double>> counts(bins, std::vector<double>(draws.size()));
    for (std::size_t r = 0; r < draws.size(); ++r) {
      d_m[r] = draws[r].d_m;
      d_1[r] = draws[r].d_1;
      rr.rejected_parallel_pairs += draws[r].rejected;
      if (!(draws[r].d_m <= config.u_max)) ++rr.censored;
      for (std::size_t b = 0; b < bins; ++b) {
        counts[b][r] = draws[r].counts[b];
        total[r] += draws[r].counts[b];
      }
    }
    fill_summary(rr, total);
    rr.metrics.emplace_back("beta", beta);
    rr.metrics.emplace_back("rescaling", scale);

    const auto weibull = [&](double u) { return 1.0 - std::exp(-beta * std::pow(u, j)); };
    const auto obs = observed_sorted(d_1, config.u_max);
    rr.checks.push_back(Check::make(
        "ks_d1", ks_statistic_censored(obs, d_1.size(), config.u_max, weibull), 0.05, 0.0,
        Check::Rule::below));
    for (std::size_t b = 0; b < bins; ++b) {
      const double nu = beta * (std::pow(edges[b + 1], j) - std::pow(edges[b], j));
      rr.checks.push_back(mean_check(interval_name("count", edges[b], edges[b + 1]), counts[b], nu));
    }
    for (std::size_t a = 0; a < bins; ++a)
      for (std::size_t b = a + 1; b < bins; ++b)
        rr.checks.push_back(covariance_check(interval_name("cov", edges[a], edges[a + 1]) + "x" +
                                                 interval_name("", edges[b], edges[b + 1]),
                                             counts[a], counts[b]));
    for (std::size_t b = 1; b < edges.size(); ++b) {
      const double u = edges[b];
      rr.metrics.emplace_back("tail_empirical[u=" + fmt(u) + "]", tail_fraction(d_m, u));
      rr.metrics.emplace_back("tail_limit[u=" + fmt(u) + "]",
                              limiting_tail_small(config.m, u, beta, P.d, P.k));
    }
    apply_censoring(rr);
    rr.samples = {d_m, d_1, total};
    report.per_rho.push_back(std::move(rr));
  }
  finish(report);
  return report;
}

ExperimentReport run_sigma_experiment(const ExperimentConfig& config) {
  auto report = start_report(config, {"above_m", "below_m", "first_gap_above", "first_gap_below",
                                      "count_above", "count_below"});
  const auto& P = config.params;
  const double sigma = config.sigma;
  const double beta = beta_sigma(P, config.window, sigma);
  const auto edges = bin_edges(config);
  const std::size_t bins = edges.size() - 1;

  struct Draw {
    double above_m = kInf, below_m = kInf, gap_above = kInf, gap_below = kInf;
    std::vector<double> above, below;
    std::int64_t rejected = 0;
  };

  for (std::size_t ri = 0; ri < config.rho_grid.size(); ++ri) {
    const double rho = config.rho_grid[ri];
    const Window K = config.window.with_scale(rho);
    const double scale = std::pow(rho, P.d);
    const double half = config.u_max / scale;
    if (!(sigma - half > 0.0))
      throw std::invalid_argument("sigma window reaches below zero distance; raise rho or lower u_max");
    const double cap = sigma + half;
    const SampleRegion region{enclosing_radius_for_proximity(K, cap)};
    const auto draws = replicate<Draw>(config, ri, [&](Rng& rng) {
      const auto sample = sample_process(region, P, rng);
      const auto ordered =
          distance_point_process(sample, K, cap, kGeneralPositionTol, PairEnumeration::pruned);
      Draw d;
      d.rejected = ordered.rejected_parallel_pairs;
      const auto nm = around_sigma(ordered, sigma, config.m);
      const auto n1 = around_sigma(ordered, sigma, 1);
      if (nm.above) d.above_m = scale * (*nm.above - sigma);
      if (nm.below) d.below_m = scale * (sigma - *nm.below);
      if (n1.above) d.gap_above = scale * (*n1.above - sigma);
      if (n1.below) d.gap_below = scale * (sigma - *n1.below);
      d.above.assign(bins, 0.0);
      d.below.assign(bins, 0.0);
      for (const auto& rec : ordered.records) {
        const double x = scale * (rec.distance - sigma);
        for (std::size_t b = 0; b < bins; ++b) {
          if (x > edges[b] && x <= edges[b + 1]) d.above[b] += 1.0;
          if (-x > edges[b] && -x <= edges[b + 1]) d.below[b] += 1.0;
        }
      }
      return d;
    });

    RhoReport rr;
    rr.rho = rho;
    const std::size_t n = draws.size();
    std::vector<double> above_m(n), below_m(n), gap_above(n), gap_below(n), tot_above(n, 0.0),
        tot_below(n, 0.0), diff(n);
    std::vector<std::vector<double>> above(bins, std::vector<double>(n)),
        below(bins, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
      const auto& d = draws[r];
      above_m[r] = d.above_m;
      below_m[r] = d.below_m;
      gap_above[r] = d.gap_above;
      gap_below[r] = d.gap_below;
      rr.rejected_parallel_pairs += d.rejected;
      if (!(d.above_m <= config.u_max) || !(d.below_m <= config.u_max)) ++rr.censored;
      for (std::size_t b = 0; b < bins; ++b) {
        above[b][r] = d.above[b];
        below[b][r] = d.below[b];
        tot_above[r] += d.above[b];
        tot_below[r] += d.below[b];
      }
      diff[r] = tot_above[r] - tot_below[r];
    }
    fill_summary(rr, tot_above);
    rr.metrics.emplace_back("beta", beta);
    rr.metrics.emplace_back("rescaling", scale);
    rr.metrics.emplace_back("mean_count_below", summarize(tot_below).mean);

    for (std::size_t b = 0; b < bins; ++b) {
      const double nu = beta * (edges[b + 1] - edges[b]);
      rr.checks.push_back(mean_check(interval_name("above", edges[b], edges[b + 1]), above[b], nu));
      rr.checks.push_back(mean_check(interval_name("below", edges[b], edges[b + 1]), below[b], nu));
    }
    rr.checks.push_back(mean_check("symmetry", diff, 0.0));

    const auto expo = [&](double u) { return 1.0 - std::exp(-beta * u); };
    rr.checks.push_back(Check::make(
        "ks_first_gap_above",
        ks_statistic_censored(observed_sorted(gap_above, config.u_max), n, config.u_max, expo), 0.05,
        0.0, Check::Rule::below));
    rr.checks.push_back(Check::make(
        "ks_first_gap_below",
        ks_statistic_censored(observed_sorted(gap_below, config.u_max), n, config.u_max, expo), 0.05,
        0.0, Check::Rule::below));
    for (std::size_t b = 1; b < edges.size(); ++b) {
      const double u = edges[b];
      rr.metrics.emplace_back("tail_above_empirical[u=" + fmt(u) + "]", tail_fraction(above_m, u));
      rr.metrics.emplace_back("tail_below_empirical[u=" + fmt(u) + "]", tail_fraction(below_m, u));
      rr.metrics.emplace_back("tail_limit[u=" + fmt(u) + "]", limiting_tail_sigma(config.m, u, beta));
    }
    apply_censoring(rr);
    rr.samples = {above_m, below_m, gap_above, gap_below, tot_above, tot_below};
    report.per_rho.push_back(std::move(rr));
  }
  finish(report);
  return report;
}

ExperimentReport run_shell_experiment(const ExperimentConfig& config) {
  std::vector<std::string> columns;
  for (int n = 1; n <= config.n_max; ++n) columns.push_back("s_" + std::to_string(n));
  auto report = start_report(config, columns);
  if (config.n_max == 0) {
    finish(report);
    return report;
  }
  const auto& P = config.params;
  const double det = determinant_constant(P);
  const std::size_t shells = static_cast<std::size_t>(config.n_max);

  struct Draw {
    std::vector<double> counts;
    std::int64_t rejected = 0;
  };

  for (std::size_t ri = 0; ri < config.rho_grid.size(); ++ri) {
    const double rho = config.rho_grid[ri];
    const double r = rho * config.window.radius();
    const SampleRegion region{(0.5 * shell_upper(config.n_max, r) + r) * (1.0 + 1e-9)};
    const auto draws = replicate<Draw>(config, ri, [&](Rng& rng) {
      const auto sample = sample_process(region, P, rng);
      const auto sc = shell_counts(sample, r, config.n_max, kGeneralPositionTol,
                                   PairEnumeration::pruned);
      Draw d;
      d.rejected = sc.rejected_parallel_pairs;
      for (auto c : sc.counts) d.counts.push_back(static_cast<double>(c));
      return d;
    });

    RhoReport rr;
    rr.rho = rho;
    const std::size_t nrep = draws.size();
    std::vector<std::vector<double>> s(shells, std::vector<double>(nrep));
    std::vector<double> total(nrep, 0.0);
    for (std::size_t q = 0; q < nrep; ++q) {
      rr.rejected_parallel_pairs += draws[q].rejected;
      for (std::size_t n = 0; n < shells; ++n) {
        s[n][q] = draws[q].counts[n];
        total[q] += s[n][q];
      }
    }
    fill_summary(rr, total);
    for (std::size_t n = 0; n < shells; ++n) {
      const int shell = static_cast<int>(n) + 1;
      rr.checks.push_back(mean_check("shell_mean[" + std::to_string(shell) + "]", s[n],
                                     shell_mean(shell, r, P, det)));
    }
    for (std::size_t n = 0; n + 1 < shells; ++n) {
      const std::string tag = "[" + std::to_string(n + 1) + "," + std::to_string(n + 2) + "]";
      rr.checks.push_back(covariance_check("adjacent_cov" + tag, s[n], s[n + 1]));
      rr.metrics.emplace_back("adjacent_correlation" + tag, covariance(s[n], s[n + 1]).correlation);
    }
    std::vector<bool> hit(nrep, false);
    for (std::size_t n = 0; n < shells; ++n) {
      std::size_t positive = 0;
      for (std::size_t q = 0; q < nrep; ++q) {
        hit[q] = hit[q] || s[n][q] > 0.0;
        if (hit[q]) ++positive;
      }
      rr.metrics.emplace_back("fraction_max_positive[" + std::to_string(n + 1) + "]",
                              static_cast<double>(positive) / static_cast<double>(nrep));
    }
    rr.samples = s;
    report.per_rho.push_back(std::move(rr));
  }
  finish(report);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  switch (config.estimand) {
    case Estimand::mean: return run_mean_experiment(config);
    case Estimand::variance: return run_variance_experiment(config);
    case Estimand::clt: return run_clt_experiment(config);
    case Estimand::extremes: return run_extremes_experiment(config);
    case Estimand::sigma: return run_sigma_experiment(config);
    case Estimand::shells: return run_shell_experiment(config);
  }
  throw std::invalid_argument("unknown estimand");
}

namespace {

const char* rule_name(Check::Rule r) {
  switch (r) {
    case Check::Rule::within: return "within";
    case Check::Rule::below: return "below";
    case Check::Rule::at_most: return "at_most";
  }
  return "unknown";
}

json checks_json(const std::vector<Check>& checks) {
  json out = json::array();
  for (const auto& c : checks)
    out.push_back({{"name", c.name},
                   {"value", c.value},
                   {"reference", c.reference},
                   {"tolerance", c.tolerance},
                   {"rule", rule_name(c.rule)},
                   {"verdict", to_string(c.verdict)}});
  return out;
}

}  // namespace

std::string ExperimentReport::to_json() const {
  const auto& c = config;
  json cfg = {{"d", c.params.d},
              {"k", c.params.k},
              {"t", c.params.t},
              {"delta", c.params.delta},
              {"directions", c.params.directions.name()},
              {"window", c.window.spec()},
              {"rho_grid", c.rho_grid},
              {"replications", c.replications},
              {"seed", c.seed}};
  switch (estimand) {
    case Estimand::extremes:
      cfg["m"] = c.m;
      cfg["u_max"] = c.u_max;
      cfg["u_grid"] = bin_edges(c);
      break;
    case Estimand::sigma:
      cfg["sigma"] = c.sigma;
      cfg["m"] = c.m;
      cfg["u_max"] = c.u_max;
      cfg["u_grid"] = bin_edges(c);
      break;
    case Estimand::shells: cfg["n_max"] = c.n_max; break;
    case Estimand::variance:
    case Estimand::clt:
      cfg["kernel_inner"] = c.kernel_inner;
      cfg["kernel_outer"] = c.kernel_outer;
      break;
    case Estimand::mean: break;
  }
  json rows = json::array();
  for (const auto& rr : per_rho) {
    json metrics = json::object();
    for (const auto& [name, value] : rr.metrics) metrics[name] = value;
    rows.push_back({{"rho", rr.rho},
                    {"replications", rr.replications},
                    {"mean", rr.mean},
                    {"variance", rr.variance},
                    {"mean_se", rr.mean_se},
                    {"variance_se", rr.variance_se},
                    {"censored", rr.censored},
                    {"rejected_parallel_pairs", rr.rejected_parallel_pairs},
                    {"metrics", metrics},
                    {"checks", checks_json(rr.checks)}});
  }
  json out = {{"schema", "flatprox.report/1"},
              {"estimand", to_string(estimand)},
              {"config", cfg},
              {"verdict", to_string(verdict)},
              {"checks", checks_json(checks)},
              {"per_rho", rows}};
  return out.dump(2) + "\n";
}

void ExperimentReport::write_samples_csv(std::ostream& os) const {
  os << "rho,rep_id";
  for (const auto& name : sample_columns) os << ',' << name;
  os << '\n';
  os << std::setprecision(17);
  for (const auto& rr : per_rho) {
    if (rr.samples.empty()) continue;
    const std::size_t n = rr.samples.front().size();
    for (std::size_t r = 0; r < n; ++r) {
      os << rr.rho << ',' << r;
      for (const auto& col : rr.samples) os << ',' << col[r];
      os << '\n';
    }
  }
}

}  // namespace flatprox
