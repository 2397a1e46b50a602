#pragma once

#include <stdexcept>
#include <string>

namespace flatprox {

/// Input that cannot represent a flat (e.g. a rank-deficient basis).
class DegenerateInput : public std::invalid_argument {
 public:
  explicit DegenerateInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Two flats whose direction spaces are not in general position.
class ParallelFlats : public std::domain_error {
 public:
  explicit ParallelFlats(const std::string& what) : std::domain_error(what) {}
};

/// The sampled region is too small for the requested statistic.
class RegionTooSmall : public std::invalid_argument {
 public:
  explicit RegionTooSmall(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace flatprox
