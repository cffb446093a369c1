#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "driftfuzz/cluster.hpp"
#include "driftfuzz/error.hpp"
#include "driftfuzz/frequency.hpp"
#include "driftfuzz/impute.hpp"
#include "driftfuzz/mdl.hpp"
#include "driftfuzz/observation_set.hpp"

namespace driftfuzz {

/// TFN(a, b, c) with a = d - sigma, b = d, c = d + sigma.
struct TriangularFuzzyDistance {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  static TriangularFuzzyDistance from_estimate(double d_hat, double sigma) {
    if (!(sigma > 0.0)) fail(ErrorCode::NonPositiveSigma, "fuzzy distance spread must be positive");
    return {d_hat - sigma, d_hat, d_hat + sigma};
  }
};

/// GFN(a, b): center a = d, spread b = sigma.
struct GaussianFuzzyDistance {
  double a = 0.0;
  double b = 0.0;

  static GaussianFuzzyDistance from_estimate(double d_hat, double sigma) {
    if (!(sigma > 0.0)) fail(ErrorCode::NonPositiveSigma, "fuzzy distance spread must be positive");
    return {d_hat, sigma};
  }
};

enum class Membership { Triangular, Gaussian };

constexpr std::string_view to_string(Membership m) noexcept {
  return m == Membership::Triangular ? "triangular" : "gaussian";
}

struct FwfConfig {
  Membership membership = Membership::Triangular;
  std::size_t q = 3;
};

/// Membership of an observation to its z-th closest cluster (z = 0 is the
/// closest) from the overlap of congruent triangles, relative to the
/// closest cluster's overlap. Zero once the triangles stop overlapping.
inline double membership_triangular(std::span<const double> sorted_distances, double sigma, std::size_t z) {
  if (!(sigma > 0.0)) fail(ErrorCode::NonPositiveSigma, "sigma must be positive");
  // Right foot of the closest TFN minus left foot of the z-th: 2 sigma + d1 - dz.
  const double overlap = 2.0 * sigma + (sorted_distances[0] - sorted_distances[z]);
  if (overlap <= 0.0) return 0.0;
  return overlap * overlap / (4.0 * sigma * sigma);
}

/// Twice the mass of N(d_z, sigma) below the midpoint between d_1 and d_z:
/// 1 + erf((d_1 - d_z) / (2 sqrt(2) sigma)).
inline double membership_gaussian(std::span<const double> sorted_distances, double sigma, std::size_t z) {
  if (!(sigma > 0.0)) fail(ErrorCode::NonPositiveSigma, "sigma must be positive");
  return 1.0 + std::erf((sorted_distances[0] - sorted_distances[z]) / (2.0 * std::numbers::sqrt2 * sigma));
}

/// Centroid indices ordered by ascending distance, ties to the lower index.
inline std::vector<std::size_t> rank_order(std::span<const double> distances) {
  std::vector<std::size_t> order(distances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });
  return order;
}

/// Top-Q normalization. `memberships` and `ranks` are indexed by centroid;
/// ranks[z] = 0 marks the closest centroid. Weights outside the Q closest
/// are zero; if every retained membership is zero the nearest centroid
/// takes the whole weight.
inline std::vector<double> topq_weights(std::span<const double> memberships, std::span<const std::size_t> ranks,
                                        std::size_t q) {
  const std::size_t k = memberships.size();
  if (ranks.size() != k) fail(ErrorCode::LengthMismatch, "ranks and memberships differ in length");
  if (q < 1 || q > k) fail(ErrorCode::InvalidArgument, "Q must lie in [1, K]");
  double total = 0.0;
  for (std::size_t z = 0; z < k; ++z)
    if (ranks[z] < q) total += memberships[z];
  std::vector<double> w(k, 0.0);
  if (!(total > 0.0)) {
    for (std::size_t z = 0; z < k; ++z)
      if (ranks[z] == 0) w[z] = 1.0;
    return w;
  }
  for (std::size_t z = 0; z < k; ++z)
    if (ranks[z] < q) w[z] = memberships[z] / total;
  return w;
}

/// Per-centroid weights of one observation from its estimated distances
/// (centroid order) under the configured membership and Top-Q constraint.
inline std::vector<double> observation_weights(std::span<const double> distances, double sigma,
                                               const FwfConfig& cfg) {
  const std::size_t k = distances.size();
  const auto order = rank_order(distances);
  std::vector<double> sorted(k);
  std::vector<std::size_t> ranks(k);
  for (std::size_t r = 0; r < k; ++r) {
    sorted[r] = distances[order[r]];
    ranks[order[r]] = r;
  }
  std::vector<double> mu(k, 0.0);
  for (std::size_t r = 0; r < std::min(cfg.q, k); ++r) {
    mu[order[r]] = cfg.membership == Membership::Triangular ? membership_triangular(sorted, sigma, r)
                                                            : membership_gaussian(sorted, sigma, r);
  }
  return topq_weights(mu, ranks, cfg.q);
}

/// Closed-form triangular weight over all K clusters,
///   (c1 - a_z)^2 / (K c1^2 - 2 c1 sum a_i + sum a_i^2).
/// Only meaningful when every triangle overlaps the closest one.
inline double triangular_weight_closed_form(std::span<const double> sorted_distances, double sigma,
                                            std::size_t z) {
  const auto k = static_cast<double>(sorted_distances.size());
  const double c1 = sorted_distances[0] + sigma;
  double sum_a = 0.0, sum_a2 = 0.0;
  for (double d : sorted_distances) {
    const double a = d - sigma;
    sum_a += a;
    sum_a2 += a * a;
  }
  const double az = sorted_distances[z] - sigma;
  return (c1 - az) * (c1 - az) / (k * c1 * c1 - 2.0 * c1 * sum_a + sum_a2);
}

/// Closed-form Gaussian weight over all K clusters.
inline double gaussian_weight_closed_form(std::span<const double> sorted_distances, double sigma, std::size_t z) {
  const double scale = 2.0 * std::numbers::sqrt2 * sigma;
  const double a1 = sorted_distances[0];
  double denom = static_cast<double>(sorted_distances.size());
  for (double a : sorted_distances) denom += std::erf((a1 - a) / scale);
  return (1.0 + std::erf((a1 - sorted_distances[z]) / scale)) / denom;
}

/// Per-row bin evidence for a window: complete rows carry their crisp bin,
/// rows with missing cells carry estimated distances to every centroid.
struct WindowEstimates {
  std::size_t k = 0;
  double sigma = 0.0;
  std::vector<std::size_t> crisp_bin;            // per row; k when estimated
  std::vector<std::vector<double>> distances;    // per row; empty when crisp
};

/// Complete rows are assigned by exact distance. Rows with missing cells go
/// through the distance model, using imputations of this window by every
/// pool method of the model.
inline WindowEstimates estimate_window(const ObservationSet& data, const Partition& partition,
                                       const DistanceModel& model) {
  if (data.cols() != partition.dims) fail(ErrorCode::LengthMismatch, "window width does not match partition");
  WindowEstimates est;
  est.k = partition.k;
  est.sigma = model.sigma_mask;
  est.crisp_bin.assign(data.rows(), partition.k);
  est.distances.resize(data.rows());

  bool any_missing = false;
  for (std::size_t i = 0; i < data.rows() && !any_missing; ++i) any_missing = !data.row_complete(i);
  std::vector<ObservationSet> imputed;
  if (any_missing) imputed = impute_pool(data, model.layout.pool);

  std::vector<std::span<const double>> imputed_rows(model.layout.pool.size());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (data.row_complete(i)) {
      est.crisp_bin[i] = assign_nearest(partition, data.row(i));
      continue;
    }
    for (std::size_t p = 0; p < imputed.size(); ++p) imputed_rows[p] = imputed[p].row(i);
    const auto d = estimate_distances(model, data.row(i), partition, imputed_rows);
    auto& out = est.distances[i];
    out.reserve(d.size());
    for (const auto& e : d) out.push_back(e.d_hat);
  }
  return est;
}

/// Per-row weight vectors (each of length K) implied by the estimates.
inline std::vector<std::vector<double>> window_weights(const WindowEstimates& est, const FwfConfig& cfg) {
  std::vector<std::vector<double>> out(est.crisp_bin.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (est.crisp_bin[i] < est.k) {
      out[i].assign(est.k, 0.0);
      out[i][est.crisp_bin[i]] = 1.0;
    } else {
      out[i] = observation_weights(est.distances[i], est.sigma, cfg);
    }
  }
  return out;
}

inline FrequencyVector fuzzy_frequency(const WindowEstimates& est, const FwfConfig& cfg) {
  if (cfg.q < 1 || cfg.q > est.k) fail(ErrorCode::InvalidArgument, "Q must lie in [1, K]");
  FrequencyVector v{std::vector<double>(est.k, 0.0)};
  for (std::size_t i = 0; i < est.crisp_bin.size(); ++i) {
    if (est.crisp_bin[i] < est.k) {
      v.counts[est.crisp_bin[i]] += 1.0;
      continue;
    }
    const auto w = observation_weights(est.distances[i], est.sigma, cfg);
    for (std::size_t z = 0; z < est.k; ++z) v.counts[z] += w[z];
  }
  return v;
}

/// Nearest bin by estimated distance, one whole count per observation.
inline FrequencyVector crisp_frequency(const WindowEstimates& est) {
  FrequencyVector v{std::vector<double>(est.k, 0.0)};
  for (std::size_t i = 0; i < est.crisp_bin.size(); ++i) {
    std::size_t bin = est.crisp_bin[i];
    if (bin >= est.k) {
      const auto& d = est.distances[i];
      bin = static_cast<std::size_t>(std::min_element(d.begin(), d.end()) - d.begin());
    }
    v.counts[bin] += 1.0;
  }
  return v;
}

/// Fuzzy-weighted frequency of a window. The model's pool provides the
/// imputed-distance features.
inline FrequencyVector fuzzy_frequency(const ObservationSet& data, const Partition& partition,
                                       const DistanceModel& model, const FwfConfig& cfg) {
  return fuzzy_frequency(estimate_window(data, partition, model), cfg);
}

inline FrequencyVector crisp_frequency(const ObservationSet& data, const Partition& partition,
                                       const DistanceModel& model) {
  return crisp_frequency(estimate_window(data, partition, model));
}

/// Plain histogram of complete rows.
inline FrequencyVector histogram(const ObservationSet& data, const Partition& partition) {
  FrequencyVector v{std::vector<double>(partition.k, 0.0)};
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (!data.row_complete(i))
      fail(ErrorCode::MissingValueInDistance, "row " + std::to_string(i) + " has missing cells");
    v.counts[assign_nearest(partition, data.row(i))] += 1.0;
  }
  return v;
}

}  // namespace driftfuzz
