#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace driftfuzz {

/// Per-bin counts for one window; fuzzy weighting makes them fractional.
struct FrequencyVector {
  std::vector<double> counts;

  std::size_t size() const noexcept { return counts.size(); }
  double total() const noexcept { return std::accumulate(counts.begin(), counts.end(), 0.0); }
};

}  // namespace driftfuzz
