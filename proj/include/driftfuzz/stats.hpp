#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "driftfuzz/error.hpp"
#include "driftfuzz/frequency.hpp"

namespace driftfuzz {

/// 2 x K table: row 0 = reference window, row 1 = test window.
struct ContingencyTable {
  std::array<std::vector<double>, 2> rows;

  std::size_t columns() const noexcept { return rows[0].size(); }
};

struct ChiSquareResult {
  double statistic = 0.0;
  int df = 0;
  std::vector<std::size_t> dropped_columns;
  double min_expected = 0.0;
};

/// Pearson statistic sum (O - E)^2 / E with E_ij = n_i n_j / n. Columns with
/// zero total are dropped and reduce the degrees of freedom.
inline ChiSquareResult chi_square_statistic(const ContingencyTable& t) {
  const std::size_t k = t.columns();
  if (t.rows[1].size() != k) fail(ErrorCode::LengthMismatch, "table rows differ in length");
  std::array<double, 2> row_sum{0.0, 0.0};
  for (std::size_t r = 0; r < 2; ++r)
    for (double o : t.rows[r]) {
      if (!(o >= 0.0) || !std::isfinite(o)) fail(ErrorCode::InvalidArgument, "table cells must be finite and >= 0");
      row_sum[r] += o;
    }
  if (!(row_sum[0] > 0.0) || !(row_sum[1] > 0.0)) fail(ErrorCode::DegenerateTable, "a table row sums to zero");
  const double n = row_sum[0] + row_sum[1];

  ChiSquareResult res;
  res.min_expected = std::numeric_limits<double>::infinity();
  std::size_t kept = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const double col = t.rows[0][j] + t.rows[1][j];
    if (col <= 0.0) {
      res.dropped_columns.push_back(j);
      continue;
    }
    ++kept;
    for (std::size_t r = 0; r < 2; ++r) {
      const double e = row_sum[r] * col / n;
      const double d = t.rows[r][j] - e;
      res.statistic += d * d / e;
      res.min_expected = std::min(res.min_expected, e);
    }
  }
  if (kept < 2) fail(ErrorCode::DegenerateTable, "fewer than two non-empty columns");
  res.df = static_cast<int>(kept - 1);
  return res;
}

namespace stats_detail {

/// log Gamma(df / 2) for integer df >= 1, by exact recurrence from
/// Gamma(1/2) = sqrt(pi) and Gamma(1) = 1.
inline double log_gamma_half(int df) {
  double a = (df % 2 == 0) ? 1.0 : 0.5;
  double out = (df % 2 == 0) ? 0.0 : 0.5 * std::log(std::numbers::pi);
  const double target = 0.5 * df;
  while (a < target) {
    out += std::log(a);
    a += 1.0;
  }
  return out;
}

/// Regularized lower incomplete gamma P(a, x) by its power series.
inline double lower_gamma_series(double a, double x, double log_gamma_a) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma_a);
}

/// Regularized upper incomplete gamma Q(a, x) by modified Lentz evaluation
/// of its continued fraction.
inline double upper_gamma_fraction(double a, double x, double log_gamma_a) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma_a) * h;
}

}  // namespace stats_detail

/// Chi-square survival function Q(df/2, x/2).
inline double chi_square_sf(double x, int df) {
  if (df < 1) fail(ErrorCode::InvalidArgument, "degrees of freedom must be >= 1");
  if (std::isnan(x) || x < 0.0) fail(ErrorCode::InvalidArgument, "chi-square statistic must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double a = 0.5 * df;
  const double h = 0.5 * x;
  const double lg = stats_detail::log_gamma_half(df);
  double q = h < a + 1.0 ? 1.0 - stats_detail::lower_gamma_series(a, h, lg)
                         : stats_detail::upper_gamma_fraction(a, h, lg);
  return std::clamp(q, 0.0, 1.0);
}

struct DriftVerdict {
  double chi2 = 0.0;
  int df = 0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool drift = false;
  bool low_expected_warning = false;
  std::vector<std::string> warnings;
};

/// Box's guidance for the chi-square approximation wants every E > 5.
inline constexpr double kMinExpectedCount = 5.0;

inline DriftVerdict drift_test(const FrequencyVector& reference, const FrequencyVector& test, double alpha) {
  if (reference.size() != test.size()) fail(ErrorCode::LengthMismatch, "frequency vectors differ in length");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  const auto res = chi_square_statistic(ContingencyTable{{reference.counts, test.counts}});
  DriftVerdict v;
  v.chi2 = res.statistic;
  v.df = res.df;
  v.p_value = chi_square_sf(res.statistic, res.df);
  v.alpha = alpha;
  v.drift = v.p_value < alpha;
  v.low_expected_warning = res.min_expected <= kMinExpectedCount;
  for (auto j : res.dropped_columns) v.warnings.push_back("dropped empty bin " + std::to_string(j));
  if (v.low_expected_warning) v.warnings.push_back("expected count <= 5 in at least one cell");
  return v;
}

inline double drift_detection_ratio(std::span<const DriftVerdict> verdicts) {
  if (verdicts.empty()) fail(ErrorCode::EmptyInput, "no verdicts");
  std::size_t hits = 0;
  for (const auto& v : verdicts) hits += v.drift ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(verdicts.size());
}

inline double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::LengthMismatch, "series differ in length");
  if (a.size() < 2) fail(ErrorCode::EmptyInput, "correlation needs at least two points");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) fail(ErrorCode::ZeroVariance, "a series has zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// Average ranks (1-based), ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t s = 0; s < order.size();) {
    std::size_t e = s;
    while (e < order.size() && v[order[e]] == v[order[s]]) ++e;
    const double r = 0.5 * static_cast<double>(s + e + 1);
    for (std::size_t t = s; t < e; ++t) ranks[order[t]] = r;
    s = e;
  }
  return ranks;
}

inline double spearman_correlation(std::span<const double> a, std::span<const double> b) {
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson_correlation(ra, rb);
}

inline double mae(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) fail(ErrorCode::LengthMismatch, "prediction/truth length mismatch");
  if (pred.empty()) fail(ErrorCode::EmptyInput, "no predictions");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

inline double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) fail(ErrorCode::LengthMismatch, "prediction/truth length mismatch");
  if (pred.empty()) fail(ErrorCode::EmptyInput, "no predictions");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

/// Sum of absolute differences between paired detection ratios with and
/// without missing values.
inline double tt_diff(std::span<const double> ratios_missing, std::span<const double> ratios_complete) {
  if (ratios_missing.size() != ratios_complete.size())
    fail(ErrorCode::LengthMismatch, "ratio vectors differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < ratios_missing.size(); ++i) s += std::abs(ratios_complete[i] - ratios_missing[i]);
  return s;
}

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for a binomial proportion (z = 1.96 for 95%).
inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace driftfuzz
