#pragma once

// Frozen regression corpus: seeded (or hand-built) flat samples together with
// their proximity counts and short-range pair distances.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flatprox/geometry.hpp"
#include "flatprox/model.hpp"

namespace flatprox {

struct GoldenPair {
  int first_index = 0;
  int second_index = 0;
  double distance = 0.0;
};

struct GoldenCase {
  std::string name;
  ModelParams params;  // isotropic directions
  std::string window_spec;
  double rho = 1.0;
  std::uint64_t seed = 0;
  double u_max = 1.0;        // cap of the stored pair list
  bool constructed = false;  // flats placed by hand; the seed is unused
  double enclosing_radius = 1.0;
  std::vector<AffineFlatd> flats;

  std::int64_t expected_count = 0;     // proximity count at params.delta
  std::int64_t expected_rejected = 0;  // pairs rejected as parallel
  std::vector<GoldenPair> expected_pairs;  // distance <= u_max, midpoint in window
};

/// Draws the flats from `seed` and fills in the expected outputs.
GoldenCase make_sampled_case(std::string name, const ModelParams& params, std::string window_spec,
                             double rho, std::uint64_t seed, double u_max);

/// Uses the given flats and fills in the expected outputs.
GoldenCase make_constructed_case(std::string name, const ModelParams& params,
                                 std::string window_spec, double rho, double u_max,
                                 std::vector<AffineFlatd> flats);

std::string golden_to_json(const GoldenCase& c);
GoldenCase golden_from_json(const std::string& text);

struct GoldenDiff {
  std::string case_name;
  std::string field;
  std::string detail;
};

/// Recomputes one case. Sampled cases also redraw their flats from the seed.
std::vector<GoldenDiff> diff_golden_case(const GoldenCase& c, double distance_tol = 1e-9,
                                         double general_position_tol = kGeneralPositionTol);

struct GoldenReport {
  std::size_t cases = 0;
  std::vector<GoldenDiff> diffs;
  double recorded_runtime_seconds = 0.0;
};

/// Re-runs every case listed in `<corpus>/manifest.json`.
GoldenReport regenerate_golden(const std::filesystem::path& corpus,
                               double distance_tol = 1e-9,
                               double general_position_tol = kGeneralPositionTol);

/// The twenty shipped cases.
std::vector<GoldenCase> default_golden_cases();

/// Writes one JSON file per case plus the manifest, with the measured time of
/// a full regeneration pass.
void write_golden_corpus(const std::filesystem::path& corpus, const std::vector<GoldenCase>& cases);

}  // namespace flatprox
