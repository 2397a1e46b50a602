#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "flatprox/process.hpp"

namespace flatprox {

/// One unordered pair of distinct flats (first_index < second_index).
struct DistanceRecord {
  int first_index = 0;
  int second_index = 0;
  double distance = 0.0;
  PointX<double> midpoint;
};

/// Pairs with midpoint in the window and distance <= u_max, sorted by
/// (distance, first_index, second_index).
struct OrderedDistances {
  std::vector<DistanceRecord> records;
  double u_max = 0.0;
  std::int64_t rejected_parallel_pairs = 0;
};

enum class PairEnumeration {
  brute_force,  // every unordered pair
  pruned,       // only flats passing close enough to the window
};

struct ProximityCount {
  std::int64_t count = 0;
  std::int64_t rejected_parallel_pairs = 0;
};

/// Number of unordered pairs in general position with distance <= delta and
/// midpoint inside the window.
ProximityCount proximity_count(const FlatProcessSample& sample, const Window& window, double delta,
                               double tol = kGeneralPositionTol,
                               PairEnumeration enumeration = PairEnumeration::brute_force);

OrderedDistances distance_point_process(const FlatProcessSample& sample, const Window& window,
                                        double u_max, double tol = kGeneralPositionTol,
                                        PairEnumeration enumeration = PairEnumeration::brute_force);

/// m-th smallest distance (m >= 1), or nullopt if fewer than m records.
std::optional<double> mth_smallest(const OrderedDistances& ordered, int m);

struct SigmaNeighbors {
  std::optional<double> above;  // m-th distance strictly greater than sigma
  std::optional<double> below;  // m-th distance strictly less than sigma, counting down
};

SigmaNeighbors around_sigma(const OrderedDistances& ordered, double sigma, int m);

struct ShellCounts {
  std::vector<std::int64_t> counts;  // counts[n-1] = S_n
  std::int64_t rejected_parallel_pairs = 0;
};

/// S_n = #pairs with midpoint in B_r and a_n < dist <= b_n, for n = 1..n_max.
/// Throws RegionTooSmall if the sample radius is below b_{n_max}/2 + r, and
/// std::logic_error if one flat contributes to two different shells.
ShellCounts shell_counts(const FlatProcessSample& sample, double r, int n_max,
                         double tol = kGeneralPositionTol,
                         PairEnumeration enumeration = PairEnumeration::brute_force);

/// CSV rows `rep_id,i,j,distance,m_0,...,m_{d-1}`; header when `header` is set.
void write_records_csv(std::ostream& os, std::int64_t rep_id, const OrderedDistances& ordered,
                       int d, bool header);

}  // namespace flatprox
