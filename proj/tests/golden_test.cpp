#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flatprox/golden.hpp"

using namespace flatprox;
namespace fs = std::filesystem;

namespace {

const fs::path corpus_dir{FLATPROX_CORPUS_DIR};

bool has_diff(const GoldenReport& r, const std::string& name) {
  for (const auto& d : r.diffs)
    if (d.case_name == name) return true;
  return false;
}

}  // namespace

TEST_CASE("shipped corpus regenerates without differences") {
  const auto r = regenerate_golden(corpus_dir);
  CHECK(r.cases >= 20);
  for (const auto& d : r.diffs) MESSAGE(d.case_name << " " << d.field << ": " << d.detail);
  CHECK(r.diffs.empty());
  CHECK(r.recorded_runtime_seconds < 10.0);
}

TEST_CASE("a looser general-position tolerance is flagged in near-parallel cases") {
  const auto r = regenerate_golden(corpus_dir, 1e-9, 1e-6);
  CHECK(has_diff(r, "near_parallel_lines_1e-7"));
  CHECK(has_diff(r, "line_bundle_with_orthogonal"));
  CHECK_FALSE(has_diff(r, "lines_d3_ball"));
}

TEST_CASE("golden cases round trip through JSON") {
  for (const auto& c : default_golden_cases()) {
    const auto back = golden_from_json(golden_to_json(c));
    CHECK(back.name == c.name);
    CHECK(back.expected_count == c.expected_count);
    CHECK(back.expected_pairs.size() == c.expected_pairs.size());
    CHECK(back.flats.size() == c.flats.size());
    CHECK(diff_golden_case(back).empty());
  }
}

TEST_CASE("tampered expectations are reported") {
  auto cases = default_golden_cases();
  auto c = cases.front();
  c.expected_count += 1;
  const auto diffs = diff_golden_case(c);
  REQUIRE_FALSE(diffs.empty());
  CHECK(diffs.front().field == "count");

  auto it = std::find_if(cases.begin(), cases.end(),
                         [](const GoldenCase& g) { return !g.expected_pairs.empty(); });
  REQUIRE(it != cases.end());
  auto d = *it;
  d.expected_pairs.front().distance += 1e-6;
  bool flagged = false;
  for (const auto& x : diff_golden_case(d)) flagged |= x.field.rfind("pairs[", 0) == 0;
  CHECK(flagged);
}

TEST_CASE("writing a corpus to a fresh directory") {
  const fs::path dir = fs::temp_directory_path() / "flatprox_golden_test";
  fs::remove_all(dir);
  auto cases = default_golden_cases();
  cases.resize(3);
  write_golden_corpus(dir, cases);
  CHECK(fs::exists(dir / "manifest.json"));
  const auto r = regenerate_golden(dir);
  CHECK(r.cases == 3);
  CHECK(r.diffs.empty());
  fs::remove_all(dir);
  CHECK_THROWS(regenerate_golden(dir));
}
