#pragma once

// Replication harness tying simulated proximity statistics to the closed
// forms: mean, variance, normal approximation, extremes, sigma-neighbourhood
// and shell experiments.

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "flatprox/model.hpp"
#include "flatprox/window.hpp"

namespace flatprox {

enum class Estimand { mean, variance, clt, extremes, sigma, shells };

std::string to_string(Estimand e);
Estimand parse_estimand(const std::string& name);

struct ExperimentConfig {
  ModelParams params;
  Window window = Window::ball(3, 1.0);  // unscaled K
  std::vector<double> rho_grid{1.0};
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;  // speed only
  Estimand estimand = Estimand::mean;

  int m = 1;                    // order statistic for extremes / sigma
  double sigma = 1.0;           // centre of the sigma experiment
  double u_max = 2.0;           // observation cap in rescaled units
  std::vector<double> u_grid;   // bin edges in rescaled units
  int n_max = 4;                // shells

  std::size_t kernel_inner = 1000;
  std::size_t kernel_outer = 2000;
  bool keep_samples = false;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

/// One acceptance rule applied to a measured value.
struct Check {
  enum class Rule {
    within,   // |value - reference| <= tolerance
    below,    // value < reference
    at_most,  // value <= reference
  };
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  Rule rule = Rule::within;
  Verdict verdict = Verdict::fail;

  static Check make(std::string name, double value, double reference, double tolerance,
                    Rule rule = Rule::within);
};

struct RhoReport {
  double rho = 1.0;
  std::size_t replications = 0;
  double mean = 0.0;
  double variance = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
  std::int64_t censored = 0;
  std::int64_t rejected_parallel_pairs = 0;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<Check> checks;
  std::vector<std::vector<double>> samples;  // samples[column][rep], kept on request
};

struct ExperimentReport {
  Estimand estimand = Estimand::mean;
  ExperimentConfig config;
  std::vector<std::string> sample_columns;
  std::vector<RhoReport> per_rho;
  std::vector<Check> checks;  // rules spanning the whole rho grid
  Verdict verdict = Verdict::pass;

  /// Canonical JSON (no timings, no worker count). Byte-identical for equal
  /// config and seed.
  std::string to_json() const;
  /// `rho,rep_id,<columns>` rows of retained samples.
  void write_samples_csv(std::ostream& os) const;
};

/// Combined verdict: any fail -> fail, else any inconclusive -> inconclusive.
Verdict combine(const std::vector<Check>& checks, Verdict start = Verdict::pass);

ExperimentReport run_mean_experiment(const ExperimentConfig& config);
ExperimentReport run_variance_experiment(const ExperimentConfig& config);
ExperimentReport run_clt_experiment(const ExperimentConfig& config);
ExperimentReport run_extremes_experiment(const ExperimentConfig& config);
ExperimentReport run_sigma_experiment(const ExperimentConfig& config);
ExperimentReport run_shell_experiment(const ExperimentConfig& config);

/// Dispatches on config.estimand.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Typical statistical noise of a Kolmogorov distance from n draws.
inline double kolmogorov_noise(std::size_t n) { return 0.87 / std::sqrt(static_cast<double>(n)); }

}  // namespace flatprox
