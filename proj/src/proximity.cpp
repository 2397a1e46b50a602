#include "flatprox/proximity.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "flatprox/closedform.hpp"
#include "flatprox/errors.hpp"

namespace flatprox {
namespace {

std::vector<int> all_indices(const FlatProcessSample& sample) {
  std::vector<int> idx(sample.flats.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

// Flats within `reach` of the origin; any flat of a qualifying pair passes
// within circumradius + distance/2 of the window centre.
std::vector<int> indices_within(const FlatProcessSample& sample, double reach) {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(sample.flats.size()); ++i)
    if (sample.flats[static_cast<std::size_t>(i)].offset_norm() <= reach) idx.push_back(i);
  return idx;
}

template <typename Visit>
std::int64_t for_each_pair(const FlatProcessSample& sample, const std::vector<int>& idx,
                           double tol, Visit&& visit) {
  std::int64_t rejected = 0;
  const auto& flats = sample.flats;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const auto& E = flats[static_cast<std::size_t>(idx[a])];
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const auto& F = flats[static_cast<std::size_t>(idx[b])];
      auto cp = try_closest_points(E, F, tol);
      if (!cp) {
        ++rejected;
        continue;
      }
      visit(idx[a], idx[b], *cp);
    }
  }
  return rejected;
}

void require_region(const FlatProcessSample& sample, const Window& window, double reach) {
  const double needed = window.circumradius() + 0.5 * reach;
  if (sample.region.enclosing_radius < needed)
    throw RegionTooSmall("sample radius " + std::to_string(sample.region.enclosing_radius) +
                         " is below circumradius + u/2 = " + std::to_string(needed));
}

void check_restriction(const FlatProcessSample& sample, int i, int j) {
  const double R = sample.region.enclosing_radius;
  if (sample.flats[static_cast<std::size_t>(i)].offset_norm() > R * (1 + 1e-12) ||
      sample.flats[static_cast<std::size_t>(j)].offset_norm() > R * (1 + 1e-12))
    throw std::logic_error("counted pair contains a flat outside the sampled region");
}

}  // namespace

ProximityCount proximity_count(const FlatProcessSample& sample, const Window& window, double delta,
                               double tol, PairEnumeration enumeration) {
  require_region(sample, window, delta);
  const auto idx = enumeration == PairEnumeration::pruned
                       ? indices_within(sample, (window.circumradius() + 0.5 * delta) * (1 + 1e-9))
                       : all_indices(sample);
  ProximityCount out;
  out.rejected_parallel_pairs =
      for_each_pair(sample, idx, tol, [&](int i, int j, const ClosestPaird& cp) {
        if (cp.distance <= delta && window.contains(cp.midpoint)) {
          check_restriction(sample, i, j);
          ++out.count;
        }
      });
  return out;
}

OrderedDistances distance_point_process(const FlatProcessSample& sample, const Window& window,
                                        double u_max, double tol, PairEnumeration enumeration) {
  require_region(sample, window, u_max);
  const auto idx = enumeration == PairEnumeration::pruned
                       ? indices_within(sample, (window.circumradius() + 0.5 * u_max) * (1 + 1e-9))
                       : all_indices(sample);
  OrderedDistances out;
  out.u_max = u_max;
  out.rejected_parallel_pairs =
      for_each_pair(sample, idx, tol, [&](int i, int j, const ClosestPaird& cp) {
        if (cp.distance <= u_max && window.contains(cp.midpoint)) {
          check_restriction(sample, i, j);
          out.records.push_back({i, j, cp.distance, cp.midpoint});
        }
      });
  std::sort(out.records.begin(), out.records.end(),
            [](const DistanceRecord& a, const DistanceRecord& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              if (a.first_index != b.first_index) return a.first_index < b.first_index;
              return a.second_index < b.second_index;
            });
  return out;
}

std::optional<double> mth_smallest(const OrderedDistances& ordered, int m) {
  if (m < 1) throw std::invalid_argument("mth_smallest: m must be >= 1");
  if (static_cast<std::size_t>(m) > ordered.records.size()) return std::nullopt;
  return ordered.records[static_cast<std::size_t>(m - 1)].distance;
}

SigmaNeighbors around_sigma(const OrderedDistances& ordered, double sigma, int m) {
  if (m < 1) throw std::invalid_argument("around_sigma: m must be >= 1");
  const auto& r = ordered.records;
  // first record with distance > sigma, and first record with distance >= sigma
  const auto upper = std::upper_bound(r.begin(), r.end(), sigma,
                                      [](double s, const DistanceRecord& x) { return s < x.distance; });
  const auto lower = std::lower_bound(r.begin(), r.end(), sigma,
                                      [](const DistanceRecord& x, double s) { return x.distance < s; });
  SigmaNeighbors out;
  if (r.end() - upper >= m) out.above = (upper + (m - 1))->distance;
  if (lower - r.begin() >= m) out.below = (lower - m)->distance;
  return out;
}

ShellCounts shell_counts(const FlatProcessSample& sample, double r, int n_max, double tol,
                         PairEnumeration enumeration) {
  if (!(r > 0.0)) throw std::invalid_argument("shell_counts: r must be positive");
  if (n_max < 0) throw std::invalid_argument("shell_counts: n_max must be >= 0");
  ShellCounts out;
  out.counts.assign(static_cast<std::size_t>(n_max), 0);
  if (n_max == 0) return out;
  const double needed = 0.5 * shell_upper(n_max, r) + r;
  if (sample.region.enclosing_radius < needed)
    throw RegionTooSmall("shell_counts: sample radius " +
                         std::to_string(sample.region.enclosing_radius) + " is below b_n/2 + r = " +
                         std::to_string(needed));

  const double r2 = r * r;
  const auto n_flats = sample.flats.size();
  std::vector<int> owner(n_flats, 0);  // shell a flat has contributed to
  auto record = [&](int i, int j, const ClosestPaird& cp) {
    if (cp.midpoint.squaredNorm() > r2) return;
    // a_n < dist <= b_n; shells are disjoint and cover (4r, 6 n_max r]
    for (int n = 1; n <= n_max; ++n) {
      if (cp.distance > shell_lower(n, r) && cp.distance <= shell_upper(n, r)) {
        for (int f : {i, j}) {
          int& o = owner[static_cast<std::size_t>(f)];
          if (o != 0 && o != n)
            throw std::logic_error("flat " + std::to_string(f) + " contributes to shells " +
                                   std::to_string(o) + " and " + std::to_string(n));
          o = n;
        }
        ++out.counts[static_cast<std::size_t>(n - 1)];
        return;
      }
    }
  };

  if (enumeration == PairEnumeration::brute_force) {
    out.rejected_parallel_pairs = for_each_pair(sample, all_indices(sample), tol, record);
    return out;
  }
  // A flat in shell n satisfies (3n-2) r < dist(E, 0) <= (3n+1) r.
  for (int n = 1; n <= n_max; ++n) {
    std::vector<int> band;
    for (int i = 0; i < static_cast<int>(n_flats); ++i) {
      const double s = sample.flats[static_cast<std::size_t>(i)].offset_norm();
      if (s > (3.0 * n - 2.0) * r && s <= (3.0 * n + 1.0) * r)
        band.push_back(i);
    }
    out.rejected_parallel_pairs += for_each_pair(sample, band, tol, record);
  }
  return out;
}

void write_records_csv(std::ostream& os, std::int64_t rep_id, const OrderedDistances& ordered,
                       int d, bool header) {
  if (header) {
    os << "rep_id,i,j,distance";
    for (int c = 0; c < d; ++c) os << ",m_" << c;
    os << '\n';
  }
  const auto old = os.precision(17);
  for (const auto& rec : ordered.records) {
    os << rep_id << ',' << rec.first_index << ',' << rec.second_index << ',' << rec.distance;
    for (int c = 0; c < d; ++c) os << ',' << rec.midpoint(c);
    os << '\n';
  }
  os.precision(old);
}

}  // namespace flatprox
