#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "driftfuzz/error.hpp"

namespace driftfuzz {

/// Payload stored in every missing cell. The mask is authoritative; the NaN
/// only makes accidental reads visible.
inline constexpr double kMissingValue = std::numeric_limits<double>::quiet_NaN();

/// m x n real matrix with a per-cell missingness mask (row-major).
class ObservationSet {
 public:
  ObservationSet() = default;

  /// `missing` holds one byte per cell, nonzero = missing. Empty `names`
  /// yields x0..x{n-1}; empty `row_ids` yields 0..m-1.
  ObservationSet(std::size_t rows, std::size_t cols, std::vector<double> values,
                 std::vector<std::uint8_t> missing, std::vector<std::string> names = {},
                 std::vector<std::size_t> row_ids = {})
      : rows_(rows), cols_(cols), values_(std::move(values)), missing_(std::move(missing)),
        names_(std::move(names)), row_ids_(std::move(row_ids)) {
    if (cols_ == 0) fail(ErrorCode::InvalidArgument, "observation set needs at least one column");
    if (values_.size() != rows_ * cols_)
      fail(ErrorCode::InvalidArgument, "value buffer does not match shape");
    if (missing_.empty()) missing_.assign(rows_ * cols_, 0);
    if (missing_.size() != rows_ * cols_)
      fail(ErrorCode::InvalidArgument, "mask buffer does not match shape");
    if (names_.empty()) {
      names_.reserve(cols_);
      for (std::size_t j = 0; j < cols_; ++j) names_.push_back("x" + std::to_string(j));
    }
    if (names_.size() != cols_) fail(ErrorCode::InvalidArgument, "column name count does not match");
    std::unordered_set<std::string> seen;
    for (const auto& n : names_)
      if (!seen.insert(n).second) fail(ErrorCode::InvalidArgument, "duplicate column name '" + n + "'");
    if (row_ids_.empty()) {
      row_ids_.resize(rows_);
      for (std::size_t i = 0; i < rows_; ++i) row_ids_[i] = i;
    }
    if (row_ids_.size() != rows_) fail(ErrorCode::InvalidArgument, "row id count does not match");
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (missing_[k]) {
        missing_[k] = 1;
        values_[k] = kMissingValue;
      } else if (std::isnan(values_[k])) {
        fail(ErrorCode::InvalidArgument, "NaN in a cell not flagged missing");
      }
    }
  }

  /// Builds from nested rows; NaN entries become missing cells.
  static ObservationSet from_rows(const std::vector<std::vector<double>>& rows,
                                  std::vector<std::string> names = {}) {
    if (rows.empty()) fail(ErrorCode::InvalidArgument, "from_rows needs at least one row");
    const std::size_t n = rows.front().size();
    std::vector<double> values;
    std::vector<std::uint8_t> missing;
    values.reserve(rows.size() * n);
    missing.reserve(rows.size() * n);
    for (const auto& r : rows) {
      if (r.size() != n) fail(ErrorCode::InvalidArgument, "ragged rows");
      for (double v : r) {
        values.push_back(v);
        missing.push_back(std::isnan(v) ? 1 : 0);
      }
    }
    return ObservationSet(rows.size(), n, std::move(values), std::move(missing), std::move(names));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  bool is_missing(std::size_t i, std::size_t j) const noexcept { return missing_[i * cols_ + j] != 0; }
  double value(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<const std::uint8_t> row_mask(std::size_t i) const noexcept {
    return {missing_.data() + i * cols_, cols_};
  }

  bool row_complete(std::size_t i) const noexcept {
    for (auto m : row_mask(i))
      if (m) return false;
    return true;
  }
  bool row_all_missing(std::size_t i) const noexcept {
    for (auto m : row_mask(i))
      if (!m) return false;
    return true;
  }

  std::size_t missing_count() const noexcept {
    std::size_t c = 0;
    for (auto m : missing_) c += m;
    return c;
  }
  bool complete() const noexcept { return missing_count() == 0; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const std::uint8_t> mask() const noexcept { return missing_; }
  const std::vector<std::string>& column_names() const noexcept { return names_; }
  /// Original row indices; preserved through row selection.
  const std::vector<std::size_t>& row_ids() const noexcept { return row_ids_; }

  ObservationSet select_rows(std::span<const std::size_t> indices) const {
    std::vector<double> v;
    std::vector<std::uint8_t> m;
    std::vector<std::size_t> ids;
    v.reserve(indices.size() * cols_);
    m.reserve(indices.size() * cols_);
    ids.reserve(indices.size());
    for (auto i : indices) {
      auto r = row(i);
      auto rm = row_mask(i);
      v.insert(v.end(), r.begin(), r.end());
      m.insert(m.end(), rm.begin(), rm.end());
      ids.push_back(row_ids_[i]);
    }
    return ObservationSet(indices.size(), cols_, std::move(v), std::move(m), names_, std::move(ids));
  }

  /// Same shape and metadata with a replaced value buffer and a clear mask.
  ObservationSet with_complete_values(std::vector<double> values) const {
    return ObservationSet(rows_, cols_, std::move(values), std::vector<std::uint8_t>(rows_ * cols_, 0),
                          names_, row_ids_);
  }

  /// Bitwise cell equality (missing cells compare by mask only).
  friend bool operator==(const ObservationSet& a, const ObservationSet& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_ || a.missing_ != b.missing_ || a.names_ != b.names_)
      return false;
    for (std::size_t k = 0; k < a.values_.size(); ++k)
      if (!a.missing_[k] && a.values_[k] != b.values_[k]) return false;
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
  std::vector<std::string> names_;
  std::vector<std::size_t> row_ids_;
};

}  // namespace driftfuzz
