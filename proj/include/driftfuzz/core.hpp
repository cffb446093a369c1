#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "driftfuzz/error.hpp"
#include "driftfuzz/observation_set.hpp"
#include "driftfuzz/random.hpp"

namespace driftfuzz {

/// Per-column missing fraction, each in [0, 1].
struct MissingRateVector {
  std::vector<double> rates;

  std::size_t size() const noexcept { return rates.size(); }
  double operator[](std::size_t i) const noexcept { return rates[i]; }
  friend bool operator==(const MissingRateVector&, const MissingRateVector&) = default;
};

inline MissingRateVector missing_rates(const ObservationSet& data) {
  std::vector<std::size_t> counts(data.cols(), 0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    auto mask = data.row_mask(i);
    for (std::size_t j = 0; j < data.cols(); ++j) counts[j] += mask[j];
  }
  MissingRateVector out;
  out.rates.reserve(data.cols());
  const double m = static_cast<double>(data.rows());
  for (auto c : counts) out.rates.push_back(data.rows() == 0 ? 0.0 : static_cast<double>(c) / m);
  return out;
}

struct CompleteMissingSplit {
  ObservationSet complete;
  ObservationSet incomplete;
};

/// Partitions rows by whether they contain a missing cell. Row order is kept
/// within each part and the original indices travel in row_ids().
inline CompleteMissingSplit split_complete_missing(const ObservationSet& data) {
  std::vector<std::size_t> complete, incomplete;
  for (std::size_t i = 0; i < data.rows(); ++i)
    (data.row_complete(i) ? complete : incomplete).push_back(i);
  if (complete.empty()) fail(ErrorCode::NoCompleteRows, "every row has at least one missing cell");
  return {data.select_rows(complete), data.select_rows(incomplete)};
}

/// Inverse of split_complete_missing: interleaves two parts by row_ids().
inline ObservationSet merge_by_row_ids(const ObservationSet& a, const ObservationSet& b) {
  if (a.cols() != b.cols()) fail(ErrorCode::LengthMismatch, "column counts differ");
  const std::size_t n = a.cols();
  const std::size_t m = a.rows() + b.rows();
  std::vector<double> values(m * n);
  std::vector<std::uint8_t> missing(m * n);
  std::vector<std::size_t> ids(m);
  std::vector<bool> placed(m, false);
  auto place = [&](const ObservationSet& part) {
    for (std::size_t i = 0; i < part.rows(); ++i) {
      const std::size_t id = part.row_ids()[i];
      if (id >= m || placed[id]) fail(ErrorCode::InvalidArgument, "row ids do not form a permutation");
      placed[id] = true;
      ids[id] = id;
      std::copy_n(part.row(i).begin(), n, values.begin() + static_cast<std::ptrdiff_t>(id * n));
      std::copy_n(part.row_mask(i).begin(), n, missing.begin() + static_cast<std::ptrdiff_t>(id * n));
    }
  };
  place(a);
  place(b);
  return ObservationSet(m, n, std::move(values), std::move(missing), a.column_names(), std::move(ids));
}

/// Euclidean distance between two complete rows. Missing cells are NaN by
/// construction, so a NaN anywhere means a masked cell was passed in.
inline double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::LengthMismatch, "rows have different lengths");
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (std::isnan(x[k]) || std::isnan(y[k]))
      fail(ErrorCode::MissingValueInDistance, "cell " + std::to_string(k) + " is missing");
    const double d = x[k] - y[k];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Unchecked squared distance for hot loops over rows already known complete.
inline double squared_distance_unchecked(std::span<const double> x, std::span<const double> y) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return s;
}

/// MCAR masking: every cell of column j goes missing independently with
/// probability rates[j]. Cells already missing stay missing.
inline ObservationSet mask_values(const ObservationSet& data, const MissingRateVector& rates,
                                  RandomSource rng) {
  if (rates.size() != data.cols()) fail(ErrorCode::LengthMismatch, "rate vector length != column count");
  for (double r : rates.rates)
    if (!(r >= 0.0 && r <= 1.0)) fail(ErrorCode::InvalidArgument, "missing rate outside [0,1]");
  auto engine = rng.engine();
  std::vector<double> values(data.values().begin(), data.values().end());
  std::vector<std::uint8_t> missing(data.mask().begin(), data.mask().end());
  const std::size_t n = data.cols();
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // Draw for every cell so the stream position does not depend on rates.
      const double u = engine.uniform();
      if (u < rates[j]) missing[i * n + j] = 1;
    }
  }
  return ObservationSet(data.rows(), n, std::move(values), std::move(missing), data.column_names(),
                        data.row_ids());
}

}  // namespace driftfuzz
