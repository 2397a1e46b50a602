#include "flatprox/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "flatprox/closedform.hpp"
#include "flatprox/experiments.hpp"
#include "flatprox/golden.hpp"
#include "flatprox/parallel.hpp"
#include "flatprox/process.hpp"
#include "flatprox/proximity.hpp"
#include "flatprox/random.hpp"
#include "flatprox/window.hpp"

namespace flatprox {
namespace {

using json = nlohmann::ordered_json;

struct CliConfig {
  int d = 3;
  int k = 1;
  double t = 1.0;
  double delta = 1.0;
  double sigma = 1.0;
  int m = 1;
  std::string window = "ball:1";
  std::vector<double> rho{1.0};
  std::size_t reps = 1000;
  std::uint64_t seed = 0;
  double u_max = 2.0;
  std::vector<double> u_grid;
  int n_max = 4;
  std::string format = "json";
  std::string output;
  unsigned workers = 1;
  std::size_t kernel_inner = 1000;
  std::size_t kernel_outer = 2000;

  std::string estimand;
  std::string records;
  std::string corpus = "corpus";
  bool write_corpus = false;
  double distance_tol = 1e-9;
  double gp_tol = kGeneralPositionTol;

  ModelParams params() const {
    ModelParams p;
    p.d = d;
    p.k = k;
    p.t = t;
    p.delta = delta;
    p.validate();
    return p;
  }
};

void add_model_options(CLI::App* app, CliConfig& c) {
  app->add_option("--d", c.d, "ambient dimension")->capture_default_str();
  app->add_option("--k", c.k, "flat dimension, k < d/2")->capture_default_str();
  app->add_option("--t", c.t, "intensity")->capture_default_str();
  app->add_option("--delta", c.delta, "distance threshold")->capture_default_str();
  app->add_option("--window", c.window, "ball:<r> or box:<a1>,...,<ad>")->capture_default_str();
  app->add_option("--rho", c.rho, "window scale(s), comma separated")->delimiter(',');
  app->add_option("--output", c.output, "write to this file instead of stdout");
}

void add_experiment_options(CLI::App* app, CliConfig& c) {
  app->add_option("--sigma", c.sigma, "centre of the sigma experiment")->capture_default_str();
  app->add_option("--m", c.m, "order statistic")->capture_default_str();
  app->add_option("--reps", c.reps, "replications per rho")->capture_default_str();
  app->add_option("--seed", c.seed, "root seed")->capture_default_str();
  app->add_option("--u-max", c.u_max, "observation cap (rescaled)")->capture_default_str();
  app->add_option("--u-grid", c.u_grid, "bin edges (rescaled), comma separated")->delimiter(',');
  app->add_option("--n-max", c.n_max, "number of shells")->capture_default_str();
  app->add_option("--format", c.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app->add_option("--workers", c.workers, "worker threads (speed only)");
  app->add_option("--kernel-inner", c.kernel_inner, "f1 samples per evaluation")
      ->capture_default_str();
  app->add_option("--kernel-outer", c.kernel_outer, "outer samples of the f1 norm")
      ->capture_default_str();
}

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file " + path);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

int run_constants(const CliConfig& c, std::ostream& out) {
  const ModelParams P = c.params();
  if (c.rho.size() != 1) throw std::invalid_argument("constants takes a single --rho");
  const Window K = Window::parse(c.window, P.d, c.rho.front());
  const Window K1 = K.unscaled();
  const double det = determinant_constant(P);
  const int j = P.d - 2 * P.k;
  json shells = json::array();
  if (K1.shape() == Window::Shape::ball)
    for (int n = 1; n <= c.n_max; ++n)
      shells.push_back({{"n", n},
                        {"lower", shell_lower(n, K1.radius())},
                        {"upper", shell_upper(n, K1.radius())},
                        {"mean", shell_mean(n, K1.radius(), P, det)}});
  json doc = {
      {"schema", "flatprox.constants/1"},
      {"d", P.d},
      {"k", P.k},
      {"t", P.t},
      {"delta", P.delta},
      {"window", K.spec()},
      {"rho", K.scale()},
      {"kappa",
       {{"k", unit_ball_volume(P.k)},
        {"d_minus_k", unit_ball_volume(P.d - P.k)},
        {"d_minus_2k", unit_ball_volume(j)},
        {"d", unit_ball_volume(P.d)}}},
      {"psi", psi(P.d, P.k)},
      {"mean_subspace_determinant", det},
      {"expected_proximity", expected_proximity(P, K, det)},
      {"chord_power_integral", chord_power_integral(K1, P.k + 1.0)},
      {"script_I", script_I(K1, P.d, P.k)},
      {"script_I_direct",
       K1.shape() == Window::Shape::ball ? json(script_I_direct(K1, P.d, P.k)) : json(nullptr)},
      {"variance_limit", asymptotic_variance_limit(P, K1)},
      {"beta_small", beta_small(P, K1, det)},
      {"sigma", c.sigma},
      {"beta_sigma", beta_sigma(P, K1, c.sigma, det)},
      {"shells", shells},
  };
  Sink sink(c.output, out);
  sink.stream() << doc.dump(2) << "\n";
  return kExitSuccess;
}

int run_sample_flats(const CliConfig& c, std::ostream& out) {
  const ModelParams P = c.params();
  if (c.rho.size() != 1) throw std::invalid_argument("sample-flats takes a single --rho");
  const Window K = Window::parse(c.window, P.d, c.rho.front());
  const SampleRegion region{enclosing_radius_for_proximity(K, P.delta)};
  Rng rng = make_rng(c.seed, {0x73616d70ULL});
  const auto sample = sample_process(region, P, rng);

  Sink sink(c.output, out);
  auto& os = sink.stream();
  os << "id";
  for (int i = 0; i < P.d * P.k; ++i) os << ",basis_" << i;
  for (int i = 0; i < P.d; ++i) os << ",anchor_" << i;
  os << '\n' << std::setprecision(17);
  for (std::size_t id = 0; id < sample.flats.size(); ++id) {
    const auto& f = sample.flats[id];
    os << id;
    for (Eigen::Index i = 0; i < f.basis().size(); ++i) os << ',' << f.basis().data()[i];
    for (Eigen::Index i = 0; i < f.anchor().size(); ++i) os << ',' << f.anchor()(i);
    os << '\n';
  }
  if (!c.records.empty()) {
    std::ofstream rec(c.records);
    if (!rec) throw std::runtime_error("cannot open records file " + c.records);
    rec << std::setprecision(17);
    write_records_csv(rec, 0, distance_point_process(sample, K, P.delta), P.d, true);
  }
  return kExitSuccess;
}

int run_verify(const CliConfig& c, std::ostream& out) {
  ExperimentConfig cfg;
  cfg.params = c.params();
  cfg.window = Window::parse(c.window, cfg.params.d);
  cfg.rho_grid = c.rho;
  cfg.replications = c.reps;
  cfg.seed = c.seed;
  cfg.workers = c.workers;
  cfg.estimand = parse_estimand(c.estimand);
  cfg.m = c.m;
  cfg.sigma = c.sigma;
  cfg.u_max = c.u_max;
  cfg.u_grid = c.u_grid;
  cfg.n_max = c.n_max;
  cfg.kernel_inner = c.kernel_inner;
  cfg.kernel_outer = c.kernel_outer;
  cfg.keep_samples = c.format == "csv";
  cfg.validate();

  const auto report = run_experiment(cfg);
  Sink sink(c.output, out);
  if (c.format == "csv")
    report.write_samples_csv(sink.stream());
  else
    sink.stream() << report.to_json();
  switch (report.verdict) {
    case Verdict::pass: return kExitSuccess;
    case Verdict::fail: return kExitVerificationFailed;
    case Verdict::inconclusive: return kExitInconclusive;
  }
  return kExitVerificationFailed;
}

int run_golden(const CliConfig& c, std::ostream& out) {
  if (c.write_corpus) {
    write_golden_corpus(c.corpus, default_golden_cases());
  }
  const auto report = regenerate_golden(c.corpus, c.distance_tol, c.gp_tol);
  json diffs = json::array();
  for (const auto& d : report.diffs)
    diffs.push_back({{"case", d.case_name}, {"field", d.field}, {"detail", d.detail}});
  json doc = {{"schema", "flatprox.golden-report/1"},
              {"cases", report.cases},
              {"recorded_runtime_seconds", report.recorded_runtime_seconds},
              {"diffs", diffs}};
  Sink sink(c.output, out);
  sink.stream() << doc.dump(2) << "\n";
  return report.diffs.empty() ? kExitSuccess : kExitVerificationFailed;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig c;
  c.workers = default_workers();
  CLI::App app{"Simulation and verification of proximity statistics of Poisson flat processes",
               "flatprox"};
  app.require_subcommand(1);

  auto* constants = app.add_subcommand("constants", "closed-form constants as JSON");
  add_model_options(constants, c);
  constants->add_option("--sigma", c.sigma, "centre for beta_sigma")->capture_default_str();
  constants->add_option("--n-max", c.n_max, "number of shell means")->capture_default_str();

  auto* sample = app.add_subcommand("sample-flats", "draw one process sample as CSV");
  add_model_options(sample, c);
  sample->add_option("--seed", c.seed, "root seed")->capture_default_str();
  sample->add_option("--records", c.records, "also write pairs with distance <= delta here");

  auto* verify = app.add_subcommand("verify", "run a verification experiment");
  add_model_options(verify, c);
  add_experiment_options(verify, c);
  verify->add_option("estimand", c.estimand, "mean|variance|clt|extremes|sigma|shells")
      ->required()
      ->check(CLI::IsMember({"mean", "variance", "clt", "extremes", "sigma", "shells"}));

  auto* golden = app.add_subcommand("golden", "check (or rewrite) the regression corpus");
  golden->add_option("--corpus", c.corpus, "corpus directory")->capture_default_str();
  golden->add_flag("--write", c.write_corpus, "regenerate the corpus files first");
  golden->add_option("--distance-tol", c.distance_tol, "distance tolerance")->capture_default_str();
  golden->add_option("--gp-tol", c.gp_tol, "general-position tolerance")->capture_default_str();
  golden->add_option("--output", c.output, "write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (constants->parsed()) return run_constants(c, out);
    if (sample->parsed()) return run_sample_flats(c, out);
    if (verify->parsed()) return run_verify(c, out);
    return run_golden(c, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace flatprox
