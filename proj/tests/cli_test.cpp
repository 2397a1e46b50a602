#include "doctest.h"

#include <numbers>
#include <sstream>

#include "json.hpp"

#include "flatprox/cli.hpp"

using namespace flatprox;
using json = nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "flatprox");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("constants for lines in R^3") {
  const auto r = run({"constants"});
  REQUIRE(r.code == kExitSuccess);
  const auto doc = json::parse(r.out);
  CHECK(doc["schema"] == "flatprox.constants/1");
  CHECK(doc["psi"].get<double>() == doctest::Approx(0.5));
  CHECK(doc["mean_subspace_determinant"].get<double>() == doctest::Approx(std::numbers::pi / 4));
  CHECK(doc["expected_proximity"].get<double>() == doctest::Approx(std::numbers::pi * std::numbers::pi / 3));
  CHECK(doc["chord_power_integral"].get<double>() == doctest::Approx(2 * std::numbers::pi));
  CHECK(doc["script_I"].get<double>() == doctest::Approx(doc["script_I_direct"].get<double>()));
  CHECK(doc["shells"].size() == 4);
  CHECK(doc["kappa"]["d"].get<double>() == doctest::Approx(4 * std::numbers::pi / 3));

  const auto box = json::parse(run({"constants", "--window", "box:1,1,1"}).out);
  CHECK(box["script_I_direct"].is_null());
  CHECK(box["shells"].empty());
}

TEST_CASE("usage errors are one line with exit code 1") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"constants", "--d", "4", "--k", "2"},
           {"constants", "--window", "sphere:1"},
           {"verify", "median"},
           {"verify", "mean", "--rho", "2,1"},
           {"bogus"},
           {}}) {
    const auto r = run(args);
    CHECK(r.code == kExitUsage);
    CHECK(lines(r.err) == 1);
    CHECK(r.err.rfind("error: ", 0) == 0);
  }
  const auto r = run({"constants", "--d", "4", "--k", "2"});
  CHECK(r.err.find("k < d/2") != std::string::npos);
  CHECK(run({"--help"}).code == kExitSuccess);
}

TEST_CASE("verify is deterministic and independent of workers") {
  const std::vector<std::string> base{"verify", "extremes", "--rho", "2", "--reps", "200",
                                      "--seed", "5"};
  auto with = [&](std::string w) {
    auto a = base;
    a.push_back("--workers");
    a.push_back(w);
    return run(a);
  };
  const auto a = with("1");
  const auto b = with("1");
  const auto c = with("3");
  CHECK(a.code == b.code);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  const auto doc = json::parse(a.out);
  CHECK(doc["estimand"] == "extremes");
  CHECK((a.code == kExitSuccess || a.code == kExitVerificationFailed || a.code == kExitInconclusive));
  CHECK((doc["verdict"] == "pass") == (a.code == kExitSuccess));
}

TEST_CASE("verify CSV output") {
  const auto r = run({"verify", "mean", "--rho", "1,2", "--reps", "20", "--format", "csv"});
  CHECK(r.code != kExitUsage);
  CHECK(r.out.rfind("rho,rep_id,", 0) == 0);
  CHECK(lines(r.out) == 41);
}

TEST_CASE("sample-flats CSV") {
  const auto r = run({"sample-flats", "--seed", "3", "--t", "2"});
  REQUIRE(r.code == kExitSuccess);
  std::istringstream is(r.out);
  std::string header;
  std::getline(is, header);
  CHECK(header == "id,basis_0,basis_1,basis_2,anchor_0,anchor_1,anchor_2");
  CHECK(run({"sample-flats", "--seed", "3", "--t", "2"}).out == r.out);
  CHECK(run({"sample-flats", "--seed", "4", "--t", "2"}).out != r.out);
}

TEST_CASE("golden subcommand") {
  const auto r = run({"golden", "--corpus", FLATPROX_CORPUS_DIR});
  CHECK(r.code == kExitSuccess);
  CHECK(json::parse(r.out)["diffs"].empty());
  const auto loose = run({"golden", "--corpus", FLATPROX_CORPUS_DIR, "--gp-tol", "1e-6"});
  CHECK(loose.code == kExitVerificationFailed);
  CHECK(run({"golden", "--corpus", "/nonexistent/corpus"}).code == kExitUsage);
}
