#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "driftfuzz/random.hpp"
#include "driftfuzz/stats.hpp"
#include "oracles.hpp"

using namespace driftfuzz;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("chi-square statistic examples") {
  auto r = chi_square_statistic({{std::vector<double>{25, 25}, std::vector<double>{25, 25}}});
  CHECK(r.statistic == 0.0);
  CHECK(r.df == 1);

  r = chi_square_statistic({{std::vector<double>{10, 20}, std::vector<double>{20, 10}}});
  CHECK_THAT(r.statistic, WithinAbs(20.0 / 3.0, 1e-12));
  CHECK(r.df == 1);

  r = chi_square_statistic({{std::vector<double>{10, 0, 20}, std::vector<double>{20, 0, 10}}});
  CHECK(r.df == 1);
  CHECK(r.dropped_columns == std::vector<std::size_t>{1});

  auto code = [](ContingencyTable t) {
    try {
      chi_square_statistic(t);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code({{std::vector<double>{5, 0}, std::vector<double>{5, 0}}}) == ErrorCode::DegenerateTable);
  CHECK(code({{std::vector<double>{0, 0}, std::vector<double>{5, 1}}}) == ErrorCode::DegenerateTable);
  CHECK(code({{std::vector<double>{1, 2}, std::vector<double>{1}}}) == ErrorCode::LengthMismatch);
  CHECK(code({{std::vector<double>{-1, 2}, std::vector<double>{1, 1}}}) == ErrorCode::InvalidArgument);
}

TEST_CASE("chi-square statistic is symmetric and homogeneous") {
  auto e = RandomSource(2).engine();
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + static_cast<std::size_t>(e.uniform() * 15);
    std::vector<double> a(k), b(k);
    for (std::size_t j = 0; j < k; ++j) {
      a[j] = 1 + e.uniform() * 50;
      b[j] = 1 + e.uniform() * 50;
    }
    const double x = chi_square_statistic({{a, b}}).statistic;
    CHECK_THAT(chi_square_statistic({{b, a}}).statistic, WithinRel(x, 1e-12));
    const double c = 0.5 + e.uniform() * 4;
    auto ac = a, bc = b;
    for (auto& v : ac) v *= c;
    for (auto& v : bc) v *= c;
    CHECK_THAT(chi_square_statistic({{ac, bc}}).statistic, WithinRel(c * x, 1e-10));
  }
}

TEST_CASE("chi_square_sf boundary values and the normal tail") {
  CHECK(chi_square_sf(0.0, 3) == 1.0);
  CHECK(chi_square_sf(INFINITY, 3) == 0.0);
  CHECK(chi_square_sf(1e6, 1) < 1e-100);
  CHECK_THAT(chi_square_sf(3.841, 1), WithinAbs(0.05, 5e-4));
  // chi2 with one degree of freedom is Z^2.
  for (double x : {0.1, 0.5, 1.0, 2.0, 4.0, 9.0, 16.0})
    CHECK_THAT(chi_square_sf(x, 1), WithinAbs(2.0 * oracle::normal_upper_tail(0, 1, std::sqrt(x)), 1e-9));
  // Even df has a finite Poisson-sum closed form.
  for (int df : {2, 4, 10})
    for (double x : {0.5, 3.0, 12.0, 40.0}) {
      double term = 1.0, sum = 1.0;
      for (int i = 1; i < df / 2; ++i) sum += (term *= (x / 2) / i);
      CHECK_THAT(chi_square_sf(x, df), WithinAbs(std::exp(-x / 2) * sum, 1e-10));
    }
  double prev = 1.0;
  for (double x = 0.25; x < 60; x += 0.25) {
    const double p = chi_square_sf(x, 7);
    CHECK(p <= prev);
    prev = p;
  }
  CHECK_THROWS_AS(chi_square_sf(-1.0, 1), Error);
  CHECK_THROWS_AS(chi_square_sf(1.0, 0), Error);
}

TEST_CASE("chi_square_sf agrees with Monte-Carlo sums of squared normals") {
  const std::pair<double, int> cases[] = {{1, 1}, {4, 3}, {9, 5}, {1, 2}, {4, 2}, {9, 3}};
  std::uint64_t seed = 1;
  for (auto [x, df] : cases) CHECK_THAT(chi_square_sf(x, df), WithinAbs(oracle::chi_square_sf_mc(x, df, 1000000, seed++), 5e-3));
}

TEST_CASE("drift_test examples") {
  const FrequencyVector a{{30, 40, 30}};
  const auto same = drift_test(a, a, 0.05);
  CHECK(same.chi2 == 0.0);
  CHECK(same.p_value == 1.0);
  CHECK_FALSE(same.drift);

  const auto split = drift_test({{100, 0}}, {{0, 100}}, 0.05);
  CHECK_THAT(split.chi2, WithinAbs(200.0, 1e-9));
  CHECK(split.p_value < 1e-20);
  CHECK(split.drift);

  const auto low = drift_test({{4, 100}}, {{4, 100}}, 0.05);
  CHECK(low.low_expected_warning);
  CHECK_FALSE(low.warnings.empty());
  CHECK_FALSE(drift_test({{60, 60}}, {{60, 60}}, 0.05).low_expected_warning);

  const auto dropped = drift_test({{10, 0, 10}}, {{10, 0, 10}}, 0.05);
  CHECK(dropped.df == 1);
  CHECK_FALSE(dropped.warnings.empty());

  CHECK_THROWS_AS(drift_test({{1, 2}}, {{1, 2, 3}}, 0.05), Error);
  CHECK_THROWS_AS(drift_test({{1, 2}}, {{1, 2}}, 1.0), Error);

  auto e = RandomSource(8).engine();
  for (int t = 0; t < 200; ++t) {
    FrequencyVector r{{1 + 20 * e.uniform(), 1 + 20 * e.uniform(), 1 + 20 * e.uniform()}};
    FrequencyVector s{{1 + 20 * e.uniform(), 1 + 20 * e.uniform(), 1 + 20 * e.uniform()}};
    const auto v = drift_test(r, s, 0.1);
    CHECK(v.drift == (v.p_value < 0.1));
  }
}

TEST_CASE("drift detection ratio") {
  std::vector<DriftVerdict> v(50);
  CHECK(drift_detection_ratio(v) == 0.0);
  for (int i = 0; i < 5; ++i) v[i * 7].drift = true;
  CHECK(drift_detection_ratio(v) == 0.1);
  for (auto& x : v) x.drift = true;
  CHECK(drift_detection_ratio(v) == 1.0);
  CHECK_THROWS_AS(drift_detection_ratio(std::vector<DriftVerdict>{}), Error);
}

TEST_CASE("pearson and spearman correlation") {
  const std::vector<double> a{1, 4, 2, 8, 5};
  std::vector<double> neg(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) neg[i] = -a[i];
  CHECK_THAT(pearson_correlation(a, a), WithinAbs(1.0, 1e-15));
  CHECK_THAT(pearson_correlation(a, neg), WithinAbs(-1.0, 1e-15));
  CHECK(pearson_correlation(std::vector<double>{1, -1, 1, -1}, std::vector<double>{1, 1, -1, -1}) == 0.0);
  try {
    pearson_correlation(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3});
    FAIL("expected ZeroVariance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVariance);
  }
  CHECK_THROWS_AS(pearson_correlation(std::vector<double>{1, 2}, std::vector<double>{1}), Error);

  std::vector<double> cubes;
  for (double x : a) cubes.push_back(x * x * x);
  CHECK_THAT(spearman_correlation(a, cubes), WithinAbs(1.0, 1e-15));
  CHECK(average_ranks(std::vector<double>{3, 1, 3, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
  // Classic textbook value: 1 - 6 * sum d^2 / (n (n^2 - 1)) without ties.
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 1, 4, 3, 5};
  CHECK_THAT(spearman_correlation(x, y), WithinAbs(1.0 - 6.0 * 4 / (5 * 24), 1e-12));
}

TEST_CASE("mae and rmse") {
  const std::vector<double> t{1, 2};
  CHECK(mae(t, t) == 0.0);
  CHECK(rmse(t, t) == 0.0);
  const std::vector<double> p{4, -2};
  CHECK(mae(p, t) == 3.5);
  CHECK_THAT(rmse(p, t), WithinAbs(std::sqrt(12.5), 1e-15));
  const std::vector<double> shifted{1.7, 2.7};
  CHECK_THAT(mae(shifted, t), WithinAbs(0.7, 1e-12));
  CHECK_THAT(rmse(shifted, t), WithinAbs(0.7, 1e-12));
  CHECK_THROWS_AS(mae(std::vector<double>{}, std::vector<double>{}), Error);
  CHECK_THROWS_AS(rmse(p, std::vector<double>{1}), Error);
  auto e = RandomSource(3).engine();
  for (int i = 0; i < 200; ++i) {
    std::vector<double> a(7), b(7);
    for (std::size_t j = 0; j < 7; ++j) {
      a[j] = e.uniform() * 10;
      b[j] = e.uniform() * 10;
    }
    CHECK(rmse(a, b) >= mae(a, b));
  }
}

TEST_CASE("tt_diff") {
  const std::vector<double> a{0.1, 0.2};
  CHECK(tt_diff(a, a) == 0.0);
  CHECK_THAT(tt_diff(a, std::vector<double>{0.0, 0.5}), WithinAbs(0.4, 1e-15));
  CHECK_THROWS_AS(tt_diff(a, std::vector<double>{0.1}), Error);
  // Two six-level sweeps whose differences total 0.41 and 0.88; the mean
  // over all twelve entries is 0.1075.
  const std::vector<double> c1{0, 0, 0, 0, 0, 0}, m1{0.05, 0.06, 0.07, 0.08, 0.07, 0.08};
  const std::vector<double> c2{0.2, 0.2, 0.2, 0.2, 0.2, 0.2}, m2{0.35, 0.0, 0.28, 0.05, 0.35, 0.05};
  const double t1 = tt_diff(m1, c1), t2 = tt_diff(m2, c2);
  CHECK_THAT(t1, WithinAbs(0.41, 1e-12));
  CHECK_THAT(t2, WithinAbs(0.88, 1e-12));
  CHECK_THAT((t1 + t2) / 12.0, WithinAbs(0.1075, 1e-12));
}

TEST_CASE("wilson interval") {
  const auto i = wilson_interval(5, 100);
  CHECK_THAT(i.low, WithinAbs(0.02154, 1e-4));
  CHECK_THAT(i.high, WithinAbs(0.11175, 1e-4));
  CHECK(wilson_interval(0, 10).low == 0.0);
  CHECK_THAT(wilson_interval(10, 10).high, WithinAbs(1.0, 1e-12));
  const auto none = wilson_interval(0, 0);
  CHECK(none.low == 0.0);
  CHECK(none.high == 1.0);
}

TEST_CASE("same-multinomial windows reject at the nominal rate") {
  std::mt19937_64 gen(31);
  std::vector<double> p(20);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (auto& v : p) v = u(gen);
  std::discrete_distribution<int> bins(p.begin(), p.end());
  int rejected = 0;
  for (int t = 0; t < 500; ++t) {
    FrequencyVector a{std::vector<double>(20, 0.0)}, b{std::vector<double>(20, 0.0)};
    for (int i = 0; i < 1000; ++i) {
      a.counts[bins(gen)] += 1;
      b.counts[bins(gen)] += 1;
    }
    rejected += drift_test(a, b, 0.05).drift ? 1 : 0;
  }
  CHECK_THAT(rejected / 500.0, WithinAbs(0.05, 0.03));
}
