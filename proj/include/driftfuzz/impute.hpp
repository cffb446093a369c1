#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "driftfuzz/error.hpp"
#include "driftfuzz/observation_set.hpp"

namespace driftfuzz {

enum class ImputeKind { Zero, Mean, Median, MostFrequent, Iterative };

inline constexpr std::array<ImputeKind, 5> kAllImputeKinds = {
    ImputeKind::Zero, ImputeKind::Mean, ImputeKind::Median, ImputeKind::MostFrequent,
    ImputeKind::Iterative};

constexpr std::string_view to_string(ImputeKind k) noexcept {
  switch (k) {
    case ImputeKind::Zero: return "zero";
    case ImputeKind::Mean: return "mean";
    case ImputeKind::Median: return "median";
    case ImputeKind::MostFrequent: return "most_frequent";
    case ImputeKind::Iterative: return "iterative";
  }
  return "?";
}

inline ImputeKind parse_impute_kind(std::string_view s) {
  for (auto k : kAllImputeKinds)
    if (to_string(k) == s) return k;
  fail(ErrorCode::InvalidArgument, "unknown imputation method '" + std::string(s) + "'");
}

struct ImputeMethod {
  ImputeKind kind = ImputeKind::Mean;
  int iterative_max_rounds = 10;
  double iterative_tolerance = 1e-4;

  friend bool operator==(const ImputeMethod&, const ImputeMethod&) = default;
};

/// The imputation pool, in feature-layout order.
using ImputerPool = std::vector<ImputeMethod>;

inline ImputerPool default_pool() {
  ImputerPool pool;
  for (auto k : kAllImputeKinds) pool.push_back({k});
  return pool;
}

struct ImputeReport {
  int rounds = 0;
  std::vector<std::string> warnings;
};

namespace impute_detail {

inline std::vector<double> present_values(const ObservationSet& data, std::size_t j) {
  std::vector<double> v;
  v.reserve(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i)
    if (!data.is_missing(i, j)) v.push_back(data.value(i, j));
  return v;
}

inline double column_statistic(std::vector<double> v, ImputeKind kind) {
  switch (kind) {
    case ImputeKind::Zero: return 0.0;
    case ImputeKind::Mean:
    case ImputeKind::Iterative: {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    }
    case ImputeKind::Median: {
      // Lower-middle element for even counts.
      const std::size_t k = (v.size() - 1) / 2;
      std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
      return v[k];
    }
    case ImputeKind::MostFrequent: {
      std::sort(v.begin(), v.end());
      double best = v.front();
      std::size_t best_run = 0;
      for (std::size_t a = 0; a < v.size();) {
        std::size_t b = a;
        while (b < v.size() && v[b] == v[a]) ++b;
        if (b - a > best_run) {  // strict: ties keep the smaller value
          best_run = b - a;
          best = v[a];
        }
        a = b;
      }
      return best;
    }
  }
  return 0.0;
}

/// Round-robin OLS refinement of an already mean-filled matrix.
inline void iterative_refine(const ObservationSet& data, std::vector<double>& filled,
                             const ImputeMethod& method, ImputeReport& report) {
  const std::size_t m = data.rows();
  const std::size_t n = data.cols();
  std::vector<std::size_t> targets;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i)
      if (data.is_missing(i, j)) {
        targets.push_back(j);
        break;
      }
  }
  if (targets.empty() || n < 2) return;  // nothing to do, or no regressors

  std::vector<bool> singular(n, false);
  for (int round = 0; round < method.iterative_max_rounds; ++round) {
    double max_change = 0.0;
    for (auto j : targets) {
      if (singular[j]) continue;
      std::vector<std::size_t> fit_rows, fill_rows;
      for (std::size_t i = 0; i < m; ++i) (data.is_missing(i, j) ? fill_rows : fit_rows).push_back(i);
      const auto p = static_cast<Eigen::Index>(n);  // intercept + (n-1) regressors
      Eigen::MatrixXd design(static_cast<Eigen::Index>(fit_rows.size()), p);
      Eigen::VectorXd y(static_cast<Eigen::Index>(fit_rows.size()));
      for (std::size_t r = 0; r < fit_rows.size(); ++r) {
        const auto i = fit_rows[r];
        Eigen::Index c = 0;
        design(static_cast<Eigen::Index>(r), c++) = 1.0;
        for (std::size_t k = 0; k < n; ++k)
          if (k != j) design(static_cast<Eigen::Index>(r), c++) = filled[i * n + k];
        y(static_cast<Eigen::Index>(r)) = filled[i * n + j];
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
      if (fit_rows.size() < static_cast<std::size_t>(p) || qr.rank() < p) {
        singular[j] = true;
        report.warnings.push_back("iterative imputation: singular design for column '" +
                                  data.column_names()[j] + "', kept mean fill");
        continue;
      }
      const Eigen::VectorXd beta = qr.solve(y);
      for (auto i : fill_rows) {
        double pred = beta(0);
        Eigen::Index c = 1;
        for (std::size_t k = 0; k < n; ++k)
          if (k != j) pred += beta(c++) * filled[i * n + k];
        max_change = std::max(max_change, std::abs(pred - filled[i * n + j]));
        filled[i * n + j] = pred;
      }
    }
    report.rounds = round + 1;
    if (max_change < method.iterative_tolerance) break;
  }
}

}  // namespace impute_detail

/// Fills every missing cell. Column statistics use non-missing cells only;
/// non-missing cells are copied through untouched.
inline ObservationSet impute(const ObservationSet& data, const ImputeMethod& method,
                             ImputeReport* report = nullptr) {
  ImputeReport local;
  ImputeReport& rep = report ? *report : local;
  rep = {};
  const std::size_t m = data.rows();
  const std::size_t n = data.cols();
  std::vector<double> filled(data.values().begin(), data.values().end());
  if (data.missing_count() == 0) return data.with_complete_values(std::move(filled));

  for (std::size_t j = 0; j < n; ++j) {
    bool has_missing = false;
    for (std::size_t i = 0; i < m && !has_missing; ++i) has_missing = data.is_missing(i, j);
    if (!has_missing) continue;
    double fill = 0.0;
    if (method.kind != ImputeKind::Zero) {
      auto present = impute_detail::present_values(data, j);
      if (present.empty())
        fail(ErrorCode::EmptyColumn, "column '" + data.column_names()[j] + "' has no observed values");
      fill = impute_detail::column_statistic(std::move(present), method.kind);
    }
    for (std::size_t i = 0; i < m; ++i)
      if (data.is_missing(i, j)) filled[i * n + j] = fill;
  }
  if (method.kind == ImputeKind::Iterative) impute_detail::iterative_refine(data, filled, method, rep);
  return data.with_complete_values(std::move(filled));
}

/// One imputed copy of `data` per pool entry, in pool order.
inline std::vector<ObservationSet> impute_pool(const ObservationSet& data, const ImputerPool& pool) {
  std::vector<ObservationSet> out;
  out.reserve(pool.size());
  for (const auto& method : pool) out.push_back(impute(data, method));
  return out;
}

}  // namespace driftfuzz
