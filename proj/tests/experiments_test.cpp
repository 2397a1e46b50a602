#include "doctest.h"

#include <sstream>

#include "json.hpp"

#include "flatprox/closedform.hpp"
#include "flatprox/experiments.hpp"

using namespace flatprox;
using json = nlohmann::json;

namespace {

ExperimentConfig config(Estimand e, std::size_t reps, std::vector<double> rho) {
  ExperimentConfig c;
  c.estimand = e;
  c.replications = reps;
  c.rho_grid = std::move(rho);
  c.seed = 7;
  c.kernel_inner = 200;
  c.kernel_outer = 400;
  return c;
}

const Check* find_check(const std::vector<Check>& checks, const std::string& name) {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("estimand and verdict names") {
  for (auto e : {Estimand::mean, Estimand::variance, Estimand::clt, Estimand::extremes,
                 Estimand::sigma, Estimand::shells})
    CHECK(parse_estimand(to_string(e)) == e);
  CHECK_THROWS(parse_estimand("median"));
  CHECK(to_string(Verdict::inconclusive) == "inconclusive");
}

TEST_CASE("check rules and verdict combination") {
  CHECK(Check::make("a", 1.0, 1.1, 0.2).verdict == Verdict::pass);
  CHECK(Check::make("a", 1.0, 1.5, 0.2).verdict == Verdict::fail);
  CHECK(Check::make("b", 0.1, 0.1, 0.0, Check::Rule::below).verdict == Verdict::fail);
  CHECK(Check::make("b", 0.1, 0.1, 0.0, Check::Rule::at_most).verdict == Verdict::pass);
  std::vector<Check> cs{Check::make("a", 0, 0, 1)};
  CHECK(combine(cs) == Verdict::pass);
  cs.push_back(Check::make("b", 5, 0, 1));
  cs.back().verdict = Verdict::inconclusive;
  CHECK(combine(cs) == Verdict::inconclusive);
  cs.push_back(Check::make("c", 5, 0, 1));
  CHECK(combine(cs) == Verdict::fail);
}

TEST_CASE("config validation") {
  auto c = config(Estimand::mean, 10, {1.0});
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.rho_grid = {2.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.rho_grid = {0.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.replications = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.window = Window::ball(4, 1.0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config(Estimand::extremes, 10, {1.0});
  bad.u_grid = {0.5, 3.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config(Estimand::shells, 10, {1.0});
  bad.window = Window::box({1, 1, 1});
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config(Estimand::sigma, 10, {1.0});
  bad.sigma = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("mean experiment") {
  const auto r = run_experiment(config(Estimand::mean, 2000, {1.0, 2.0}));
  REQUIRE(r.per_rho.size() == 2);
  CHECK(r.verdict == Verdict::pass);
  for (const auto& p : r.per_rho) {
    CHECK(p.replications == 2000);
    const auto* c = find_check(p.checks, "mean");
    REQUIRE(c != nullptr);
    CHECK(c->reference ==
          doctest::Approx(expected_proximity(ModelParams{}, Window::ball(3, 1.0, p.rho))));
  }
}

TEST_CASE("reports are reproducible and independent of the worker count") {
  auto c = config(Estimand::extremes, 300, {2.0});
  const auto a = run_experiment(c).to_json();
  const auto b = run_experiment(c).to_json();
  CHECK(a == b);
  c.workers = 3;
  CHECK(run_experiment(c).to_json() == a);
  c.seed = 8;
  CHECK(run_experiment(c).to_json() != a);

  const auto doc = json::parse(a);
  CHECK(doc["schema"] == "flatprox.report/1");
  CHECK(doc["estimand"] == "extremes");
  CHECK_FALSE(doc["config"].contains("workers"));
  CHECK(doc["per_rho"].size() == 1);
}

TEST_CASE("zero threshold gives zero counts") {
  auto c = config(Estimand::mean, 50, {1.0});
  c.params.delta = 0.0;
  c.keep_samples = true;
  const auto r = run_experiment(c);
  REQUIRE(r.per_rho.size() == 1);
  CHECK(r.per_rho[0].mean == 0.0);
  CHECK(r.per_rho[0].variance == 0.0);
  for (const auto& col : r.per_rho[0].samples)
    for (double x : col) CHECK(x == 0.0);
}

TEST_CASE("shell experiment with no shells is empty") {
  auto c = config(Estimand::shells, 10, {1.0});
  c.n_max = 0;
  const auto r = run_experiment(c);
  CHECK(r.verdict == Verdict::pass);
  for (const auto& p : r.per_rho) CHECK(p.checks.empty());
}

TEST_CASE("small runs of every estimand") {
  for (auto e : {Estimand::variance, Estimand::clt, Estimand::extremes, Estimand::sigma,
                 Estimand::shells}) {
    auto c = config(e, e == Estimand::shells ? 100 : 400, {1.0, 2.0});
    if (e == Estimand::sigma) c.rho_grid = {2.0};
    if (e == Estimand::shells) c.n_max = 2;
    c.keep_samples = true;
    CAPTURE(to_string(e));
    const auto r = run_experiment(c);
    CHECK(r.per_rho.size() == c.rho_grid.size());
    if (e == Estimand::clt) {
      // at rho <= 2 the normal approximation is still visibly off
      REQUIRE(find_check(r.checks, "final_distance") != nullptr);
      CHECK(find_check(r.checks, "log_log_slope") != nullptr);
      for (const auto& p : r.per_rho) CHECK(find_check(p.checks, "bound_dominates") != nullptr);
    } else {
      CHECK(r.verdict != Verdict::fail);
    }
    for (const auto& p : r.per_rho) {
      CHECK(p.samples.size() == r.sample_columns.size());
      for (const auto& col : p.samples) CHECK(col.size() == c.replications);
    }
    std::ostringstream os;
    r.write_samples_csv(os);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header.rfind("rho,rep_id,", 0) == 0);
    std::size_t rows = 0;
    for (std::string line; std::getline(is, line);) ++rows;
    CHECK(rows == c.replications * c.rho_grid.size());
  }
}

TEST_CASE("sigma window must stay positive") {
  auto c = config(Estimand::sigma, 10, {1.0});
  c.sigma = 0.5;
  c.u_max = 2.0;
  CHECK_THROWS(run_experiment(c));
}
