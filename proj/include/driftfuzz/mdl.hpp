#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "driftfuzz/cluster.hpp"
#include "driftfuzz/core.hpp"
#include "driftfuzz/error.hpp"
#include "driftfuzz/gbdt.hpp"
#include "driftfuzz/impute.hpp"
#include "driftfuzz/observation_set.hpp"
#include "driftfuzz/random.hpp"

namespace driftfuzz {

/// Column layout of a pair feature row:
///   raw(first) ++ raw(second) ++ [distance after each pool imputer]
struct FeatureLayout {
  std::size_t raw_dims = 0;
  ImputerPool pool;

  std::size_t width() const noexcept { return 2 * raw_dims + pool.size(); }
  std::size_t imputed_offset() const noexcept { return 2 * raw_dims; }
  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

/// View of one row of a PairTrainingSet.
struct PairFeatureRow {
  std::span<const double> raw;               // 2n, NaN where masked
  std::span<const double> imputed_distances;  // one per pool method
  double target = 0.0;                        // pre-mask distance
};

struct PairTrainingSet {
  FeatureLayout layout;
  FeatureMatrix features;
  std::vector<double> targets;
  /// Row positions within the complete set; first < second.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  std::size_t size() const noexcept { return targets.size(); }
  PairFeatureRow row(std::size_t r) const noexcept {
    auto full = features.row(r);
    return {full.subspan(0, layout.imputed_offset()), full.subspan(layout.imputed_offset()), targets[r]};
  }
};

struct MdlOptions {
  int n_split = 5;
  std::size_t max_pairs = 20000;
  GbdtParams gbdt;
};

namespace mdl_detail {

inline std::vector<std::pair<std::size_t, std::size_t>> select_pairs(std::size_t m, std::size_t max_pairs,
                                                                     CounterEngine& engine) {
  const std::uint64_t total = static_cast<std::uint64_t>(m) * (m - 1) / 2;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (total <= max_pairs) {
    out.reserve(static_cast<std::size_t>(total));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) out.emplace_back(i, j);
    return out;
  }
  // Selection sampling (Knuth's Algorithm S): uniform without replacement,
  // output in ascending order.
  out.reserve(max_pairs);
  std::uint64_t needed = max_pairs;
  std::size_t i = 0, j = 1;
  for (std::uint64_t k = 0; k < total && needed > 0; ++k) {
    const std::uint64_t remaining = total - k;
    if (engine.uniform() * static_cast<double>(remaining) < static_cast<double>(needed)) {
      out.emplace_back(i, j);
      --needed;
    }
    if (++j == m) {
      ++i;
      j = i + 1;
    }
  }
  return out;
}

inline double columnwise_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance_unchecked(a, b));
}

}  // namespace mdl_detail

/// Builds the masked pair training set from complete rows.
///
/// True distances are taken before masking. Each row is masked once with
/// the given column rates; the masked set is imputed once per pool method
/// and the imputed distances become additional features.
inline PairTrainingSet build_pair_training_set(const ObservationSet& complete, const MissingRateVector& rates,
                                               const ImputerPool& pool, RandomSource rng,
                                               std::size_t max_pairs = 20000) {
  if (complete.rows() < 20)
    fail(ErrorCode::TooFewRows, "masked distance learning needs at least 20 complete rows, got " +
                                    std::to_string(complete.rows()));
  if (!complete.complete()) fail(ErrorCode::InvalidArgument, "pair training set requires complete rows");
  if (pool.empty()) fail(ErrorCode::InvalidArgument, "imputer pool is empty");
  if (max_pairs == 0) fail(ErrorCode::InvalidArgument, "max_pairs must be positive");
  const std::size_t m = complete.rows();
  const std::size_t n = complete.cols();

  auto engine = rng.derive(1).engine();
  PairTrainingSet out;
  out.layout = {n, pool};
  out.pairs = mdl_detail::select_pairs(m, max_pairs, engine);

  const auto masked = mask_values(complete, rates, rng.derive(2));
  std::vector<ObservationSet> imputed;
  imputed.reserve(pool.size());
  for (const auto& method : pool) imputed.push_back(impute(masked, method));

  const std::size_t width = out.layout.width();
  out.features = FeatureMatrix(out.pairs.size(), width);
  out.targets.resize(out.pairs.size());
  for (std::size_t r = 0; r < out.pairs.size(); ++r) {
    const auto [i, j] = out.pairs[r];
    out.targets[r] = mdl_detail::columnwise_distance(complete.row(i), complete.row(j));
    auto row = out.features.row(r);
    std::copy_n(masked.row(i).begin(), n, row.begin());
    std::copy_n(masked.row(j).begin(), n, row.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t p = 0; p < pool.size(); ++p)
      row[2 * n + p] = mdl_detail::columnwise_distance(imputed[p].row(i), imputed[p].row(j));
  }
  return out;
}

/// Residual standard error sqrt(sum r^2 / (m - 2)).
inline double sigma_from_residuals(std::span<const double> residuals) {
  const std::size_t m = residuals.size();
  if (m < 3) fail(ErrorCode::TooFewResiduals, "need at least 3 residuals, got " + std::to_string(m));
  double s = 0.0;
  for (double r : residuals) s += r * r;
  return std::sqrt(s / static_cast<double>(m - 2));
}

/// Shuffled k-fold split of [0, count): fold f holds positions
/// [f*count/k, (f+1)*count/k) of a random permutation.
inline std::vector<std::vector<std::size_t>> kfold_partition(std::size_t count, int k, RandomSource rng) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "n_split must be at least 2");
  if (count < static_cast<std::size_t>(k)) fail(ErrorCode::TooFewRows, "fewer items than folds");
  std::vector<std::size_t> perm(count);
  std::iota(perm.begin(), perm.end(), 0);
  auto engine = rng.engine();
  for (std::size_t a = count; a > 1; --a) {
    const auto b = static_cast<std::size_t>(engine.uniform() * static_cast<double>(a));
    std::swap(perm[a - 1], perm[std::min(b, a - 1)]);
  }
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const std::size_t lo = f * count / folds.size();
    const std::size_t hi = (f + 1) * count / folds.size();
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(lo), perm.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(folds[f].begin(), folds[f].end());
  }
  return folds;
}

/// Trained distance regressor plus the spread of its held-out errors.
struct DistanceModel {
  GbdtModel learner;
  double sigma_mask = 0.0;
  FeatureLayout layout;
  MissingRateVector training_rates;
  std::size_t pair_count = 0;
  double cv_mae = 0.0;
  double cv_rmse = 0.0;
};

struct MdlTrainingReport {
  PairTrainingSet pairs;
  std::vector<double> heldout_predictions;  // indexed like pairs.targets
  double raw_sigma = 0.0;                   // before the floor
};

inline double predict_distance(const DistanceModel& model, std::span<const double> pair_row) {
  return std::max(0.0, gbdt_predict(model.learner, pair_row));
}

/// Masked distance learning end to end. The column missing rates of `data`
/// drive the masking of its complete rows; held-out residuals from n_split
/// folds give sigma_mask; the returned learner is refit on every pair.
inline DistanceModel train_masked_distance(const ObservationSet& data, const ImputerPool& pool,
                                           const MdlOptions& options, RandomSource rng,
                                           MdlTrainingReport* report = nullptr) {
  const auto rates = missing_rates(data);
  const auto parts = split_complete_missing(data);

  auto pairs = build_pair_training_set(parts.complete, rates, pool, rng.derive(10), options.max_pairs);
  const auto folds = kfold_partition(pairs.size(), options.n_split, rng.derive(11));

  std::vector<double> heldout(pairs.size(), 0.0);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train;
    train.reserve(pairs.size() - folds[f].size());
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    std::sort(train.begin(), train.end());
    std::vector<double> train_targets;
    train_targets.reserve(train.size());
    for (auto r : train) train_targets.push_back(pairs.targets[r]);
    const auto learner =
        gbdt_fit(pairs.features.select_rows(train), train_targets, options.gbdt, rng.derive({12, f}));
    for (auto r : folds[f]) heldout[r] = std::max(0.0, gbdt_predict(learner, pairs.features.row(r)));
  }

  std::vector<double> residuals(pairs.size());
  double abs_sum = 0.0, target_sum = 0.0;
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    residuals[r] = pairs.targets[r] - heldout[r];
    abs_sum += std::abs(residuals[r]);
    target_sum += pairs.targets[r];
  }

  DistanceModel model;
  const double raw_sigma = sigma_from_residuals(residuals);
  const double mean_target = target_sum / static_cast<double>(pairs.size());
  model.sigma_mask = std::max({raw_sigma, 1e-6 * mean_target, std::numeric_limits<double>::min()});
  model.layout = pairs.layout;
  model.training_rates = rates;
  model.pair_count = pairs.size();
  model.cv_mae = abs_sum / static_cast<double>(pairs.size());
  double sq = 0.0;
  for (double r : residuals) sq += r * r;
  model.cv_rmse = std::sqrt(sq / static_cast<double>(pairs.size()));
  model.learner = gbdt_fit(pairs.features, pairs.targets, options.gbdt, rng.derive(13));

  if (report) {
    report->pairs = std::move(pairs);
    report->heldout_predictions = std::move(heldout);
    report->raw_sigma = raw_sigma;
  }
  return model;
}

/// Estimated distance from one observation to one centroid.
struct DistanceEstimate {
  double d_hat = 0.0;
  double sigma = 0.0;
};

/// Fills `out` (width layout.width()) with the estimation-time feature row
/// for observation `x` against a crisp centroid. `imputed_x[p]` is x after
/// pool method p.
inline void build_estimation_row(const FeatureLayout& layout, std::span<const double> x,
                                 std::span<const std::span<const double>> imputed_x,
                                 std::span<const double> centroid, std::span<double> out) {
  const std::size_t n = layout.raw_dims;
  std::copy_n(x.begin(), n, out.begin());
  std::copy_n(centroid.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t p = 0; p < layout.pool.size(); ++p)
    out[2 * n + p] = mdl_detail::columnwise_distance(imputed_x[p], centroid);
}

/// Distances from `x` (NaN where missing) to every centroid, clamped at 0.
inline std::vector<DistanceEstimate> estimate_distances(const DistanceModel& model, std::span<const double> x,
                                                        const Partition& centroids,
                                                        std::span<const std::span<const double>> imputed_x) {
  const auto& layout = model.layout;
  if (x.size() != layout.raw_dims || centroids.dims != layout.raw_dims)
    fail(ErrorCode::LengthMismatch, "observation/centroid width does not match the distance model");
  if (imputed_x.size() != layout.pool.size())
    fail(ErrorCode::LengthMismatch, "one imputed copy per pool method is required");
  std::vector<double> row(layout.width());
  std::vector<DistanceEstimate> out;
  out.reserve(centroids.k);
  for (std::size_t z = 0; z < centroids.k; ++z) {
    build_estimation_row(layout, x, imputed_x, centroids.centroid(z), row);
    out.push_back({predict_distance(model, row), model.sigma_mask});
  }
  return out;
}

}  // namespace driftfuzz
