#pragma once

#include <cassert>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "driftfuzz/core.hpp"
#include "driftfuzz/error.hpp"
#include "driftfuzz/observation_set.hpp"
#include "driftfuzz/random.hpp"

namespace driftfuzz {

/// K centroids acting as histogram bins.
struct Partition {
  std::size_t k = 0;
  std::size_t dims = 0;
  std::vector<double> centroids;  // k x dims, row-major
  double inertia = 0.0;
  int iterations = 0;

  std::span<const double> centroid(std::size_t z) const noexcept {
    return {centroids.data() + z * dims, dims};
  }
};

/// Nearest centroid by Euclidean distance; ties go to the lowest index.
inline std::size_t assign_nearest(const Partition& p, std::span<const double> x) {
  if (x.size() != p.dims) fail(ErrorCode::LengthMismatch, "row length does not match partition");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < p.k; ++z) {
    const double d = squared_distance_unchecked(x, p.centroid(z));
    if (d < best_d) {
      best_d = d;
      best = z;
    }
  }
  return best;
}

/// Alg. input default: K = m / 50, clamped to at least 2. Windows smaller
/// than 100 cannot keep ~50 observations per bin.
inline std::size_t default_bin_count(std::size_t m) {
  if (m < 100) fail(ErrorCode::SampleTooSmall, "window of " + std::to_string(m) + " rows is below 100");
  return std::max<std::size_t>(2, m / 50);
}

struct KMeansOptions {
  int max_iter = 100;
};

/// Lloyd's algorithm with k-means++ seeding. Stops when assignments stop
/// changing. A cluster that empties is reseeded at the point currently
/// farthest from its own centroid.
inline Partition kmeans_fit(const ObservationSet& data, std::size_t k, RandomSource rng,
                            KMeansOptions options = {}) {
  if (k < 2) fail(ErrorCode::KTooSmall, "K must be at least 2");
  const std::size_t m = data.rows();
  const std::size_t n = data.cols();
  if (k > m) fail(ErrorCode::KTooLarge, "K=" + std::to_string(k) + " exceeds " + std::to_string(m) + " rows");
  if (!data.complete()) fail(ErrorCode::MissingValueInDistance, "k-means requires complete data");

  Partition p;
  p.k = k;
  p.dims = n;
  p.centroids.resize(k * n);
  auto set_centroid = [&](std::size_t z, std::span<const double> x) {
    std::copy(x.begin(), x.end(), p.centroids.begin() + static_cast<std::ptrdiff_t>(z * n));
  };

  // k-means++ seeding.
  auto engine = rng.engine();
  std::vector<double> d2(m, std::numeric_limits<double>::infinity());
  std::size_t first = static_cast<std::size_t>(engine.uniform() * static_cast<double>(m));
  set_centroid(0, data.row(std::min(first, m - 1)));
  for (std::size_t z = 1; z < k; ++z) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      d2[i] = std::min(d2[i], squared_distance_unchecked(data.row(i), p.centroid(z - 1)));
      total += d2[i];
    }
    if (!(total > 0.0)) fail(ErrorCode::KTooLarge, "fewer than K distinct points");
    double target = engine.uniform() * total;
    std::size_t pick = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      target -= d2[i];
      if (target < 0.0) break;
    }
    set_centroid(z, data.row(pick));
  }

  std::vector<std::size_t> assign(m, k);
  std::vector<double> dist(m, 0.0);
  std::vector<double> sums(k * n);
  std::vector<std::size_t> counts(k);
  [[maybe_unused]] double previous_inertia = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iter; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      auto x = data.row(i);
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t z = 0; z < k; ++z) {
        const double d = squared_distance_unchecked(x, p.centroid(z));
        if (d < best_d) {
          best_d = d;
          best = z;
        }
      }
      if (assign[i] != best) changed = true;
      assign[i] = best;
      dist[i] = best_d;
      inertia += best_d;
    }
    assert(inertia <= previous_inertia * (1.0 + 1e-12) + 1e-12);
    previous_inertia = inertia;
    p.inertia = inertia;
    p.iterations = iter + 1;
    if (!changed && iter > 0) break;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      auto x = data.row(i);
      ++counts[assign[i]];
      for (std::size_t c = 0; c < n; ++c) sums[assign[i] * n + c] += x[c];
    }
    for (std::size_t z = 0; z < k; ++z) {
      if (counts[z] == 0) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < m; ++i)
          if (dist[i] > dist[far]) far = i;
        set_centroid(z, data.row(far));
        dist[far] = 0.0;
        assign[far] = z;
        continue;
      }
      for (std::size_t c = 0; c < n; ++c)
        p.centroids[z * n + c] = sums[z * n + c] / static_cast<double>(counts[z]);
    }
  }
  // Final inertia against the returned centroids.
  double inertia = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto z = assign_nearest(p, data.row(i));
    inertia += squared_distance_unchecked(data.row(i), p.centroid(z));
  }
  p.inertia = inertia;
  return p;
}

}  // namespace driftfuzz
