#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "driftfuzz/core.hpp"
#include "driftfuzz/impute.hpp"
#include "driftfuzz/random.hpp"
#include "oracles.hpp"

using namespace driftfuzz;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double NaN = std::numeric_limits<double>::quiet_NaN();

ObservationSet column(std::vector<double> v) {
  std::vector<std::vector<double>> rows;
  for (double x : v) rows.push_back({x});
  return ObservationSet::from_rows(rows);
}

ObservationSet correlated_full(std::size_t m, std::uint64_t seed) {
  auto e = RandomSource(seed).engine();
  std::vector<double> v(m * 3);
  for (std::size_t i = 0; i < m; ++i) {
    const double a = e.uniform() * 4, b = e.uniform() * 2;
    v[i * 3] = a;
    v[i * 3 + 1] = b;
    v[i * 3 + 2] = 1.5 * a - 0.5 * b + 0.1 * (e.uniform() - 0.5);
  }
  return ObservationSet(m, 3, std::move(v), {});
}

ObservationSet correlated(std::size_t m, std::uint64_t seed, double rate) {
  return mask_values(correlated_full(m, seed), {{rate, rate, rate}}, RandomSource(seed + 1));
}

}  // namespace

TEST_CASE("simple statistics fill missing cells") {
  CHECK(impute(column({1, NaN, 3}), {ImputeKind::Mean}).value(1, 0) == 2.0);
  CHECK(impute(column({1, NaN, 9, 2}), {ImputeKind::Median}).value(1, 0) == 2.0);
  CHECK(impute(column({1, 1, 2, NaN}), {ImputeKind::MostFrequent}).value(3, 0) == 1.0);
  CHECK(impute(column({5, NaN}), {ImputeKind::Zero}).value(1, 0) == 0.0);
  // Even count: lower-middle element.
  CHECK(impute(column({4, 1, NaN, 3, 2}), {ImputeKind::Median}).value(2, 0) == 2.0);
  // Mode tie goes to the smallest value.
  CHECK(impute(column({3, 3, 1, 1, NaN}), {ImputeKind::MostFrequent}).value(4, 0) == 1.0);
}

TEST_CASE("complete input is returned unchanged by every method") {
  const auto s = ObservationSet::from_rows({{1, 2}, {3, 4}, {5, 7}});
  for (auto k : kAllImputeKinds) {
    ImputeReport rep;
    CHECK(impute(s, {k}, &rep) == s);
    CHECK(rep.rounds == 0);
  }
}

TEST_CASE("empty column is rejected except by zero fill") {
  const auto s = ObservationSet::from_rows({{1, NaN}, {2, NaN}});
  for (auto k : {ImputeKind::Mean, ImputeKind::Median, ImputeKind::MostFrequent, ImputeKind::Iterative}) {
    try {
      impute(s, {k});
      FAIL("expected EmptyColumn");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyColumn);
      CHECK(std::string(e.what()).find("x1") != std::string::npos);
    }
  }
  CHECK(impute(s, {ImputeKind::Zero}).complete());
}

TEST_CASE("iterative imputation recovers an exact linear relation") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({static_cast<double>(i), 2.0 * i});
  rows.push_back({5.0, NaN});
  const auto out = impute(ObservationSet::from_rows(rows), {ImputeKind::Iterative});
  CHECK_THAT(out.value(10, 1), WithinAbs(10.0, 1e-6));
}

TEST_CASE("iterative imputation on a single column is the mean fill") {
  const auto s = column({1, NaN, 5});
  CHECK(impute(s, {ImputeKind::Iterative}).value(1, 0) == 3.0);
}

TEST_CASE("iterative imputation matches a one-round OLS oracle") {
  // Only column 2 has missing cells, so one round regresses it on the fully
  // observed columns 0 and 1 and the second round changes nothing.
  auto e = RandomSource(21).engine();
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 60; ++i) {
    const double a = e.uniform() * 3, b = e.uniform();
    const double c = 0.7 * a + 2.0 * b + 0.3 * (e.uniform() - 0.5);
    if (i % 5 == 0) {
      rows.push_back({a, b, NaN});
    } else {
      rows.push_back({a, b, c});
      X.push_back({a, b});
      y.push_back(c);
    }
  }
  const auto beta = oracle::ols(X, y);
  const auto out = impute(ObservationSet::from_rows(rows), {ImputeKind::Iterative});
  for (std::size_t i = 0; i < rows.size(); i += 5) {
    const double expect = beta[0] + beta[1] * rows[i][0] + beta[2] * rows[i][1];
    CHECK_THAT(out.value(i, 2), WithinAbs(expect, 1e-9));
  }
}

TEST_CASE("singular regression falls back to the mean fill with a warning") {
  // Column 1 is constant on rows where column 0 is observed.
  const auto s = ObservationSet::from_rows({{1, 2}, {3, 2}, {NaN, 2}, {5, 2}});
  ImputeReport rep;
  const auto out = impute(s, {ImputeKind::Iterative}, &rep);
  CHECK(out.value(2, 0) == 3.0);
  CHECK_FALSE(rep.warnings.empty());
}

TEST_CASE("imputation never modifies observed cells") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = correlated(80, seed, 0.25);
    for (auto k : kAllImputeKinds) {
      const auto out = impute(s, {k});
      REQUIRE(out.complete());
      for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j)
          if (!s.is_missing(i, j)) REQUIRE(out.value(i, j) == s.value(i, j));
    }
  }
}

TEST_CASE("mean fill preserves observed column means") {
  const auto s = correlated(200, 9, 0.3);
  const auto out = impute(s, {ImputeKind::Mean});
  for (std::size_t j = 0; j < s.cols(); ++j) {
    double obs = 0.0, all = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.rows(); ++i) {
      all += out.value(i, j);
      if (!s.is_missing(i, j)) {
        obs += s.value(i, j);
        ++n;
      }
    }
    CHECK_THAT(all / static_cast<double>(s.rows()), WithinRel(obs / static_cast<double>(n), 1e-12));
  }
}

TEST_CASE("iterative imputation is deterministic and beats the mean on correlated data") {
  const auto truth = correlated_full(300, 4);
  const auto s = correlated(300, 4, 0.2);
  const auto a = impute(s, {ImputeKind::Iterative});
  CHECK(a == impute(s, {ImputeKind::Iterative}));
  const auto mean = impute(s, {ImputeKind::Mean});
  double e_iter = 0.0, e_mean = 0.0;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j)
      if (s.is_missing(i, j)) {
        e_iter += std::pow(a.value(i, j) - truth.value(i, j), 2);
        e_mean += std::pow(mean.value(i, j) - truth.value(i, j), 2);
      }
  CHECK(e_iter < 0.5 * e_mean);
}

TEST_CASE("impute_pool keeps pool order and names round trip") {
  const auto s = correlated(50, 2, 0.2);
  const auto pool = default_pool();
  REQUIRE(pool.size() == 5);
  const auto out = impute_pool(s, pool);
  REQUIRE(out.size() == pool.size());
  for (std::size_t p = 0; p < pool.size(); ++p) CHECK(out[p] == impute(s, pool[p]));
  for (auto k : kAllImputeKinds) CHECK(parse_impute_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_impute_kind("mode"), Error);
}
