#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "driftfuzz/core.hpp"
#include "driftfuzz/csv.hpp"
#include "driftfuzz/random.hpp"

using namespace driftfuzz;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double NaN = std::numeric_limits<double>::quiet_NaN();

ObservationSet uniform_set(std::size_t m, std::size_t n, std::uint64_t seed) {
  auto e = RandomSource(seed).engine();
  std::vector<double> v(m * n);
  for (auto& x : v) x = e.uniform() * 10.0 - 5.0;
  return ObservationSet(m, n, std::move(v), {});
}

}  // namespace

TEST_CASE("ObservationSet validates shape, names and NaN payloads") {
  CHECK_THROWS_AS(ObservationSet(2, 0, {}, {}), Error);
  CHECK_THROWS_AS(ObservationSet(2, 2, {1, 2, 3}, {}), Error);
  CHECK_THROWS_AS(ObservationSet(1, 2, {1, 2}, {}, {"a", "a"}), Error);
  try {
    ObservationSet(1, 2, {1, NaN}, {0, 0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  const ObservationSet s(1, 2, {1.0, 42.0}, {0, 1});
  CHECK(s.is_missing(0, 1));
  CHECK(std::isnan(s.value(0, 1)));
  CHECK(s.column_names() == std::vector<std::string>{"x0", "x1"});
}

TEST_CASE("equality ignores the payload of masked cells") {
  const ObservationSet a(1, 2, {1.0, 3.0}, {0, 1});
  const ObservationSet b(1, 2, {1.0, -7.0}, {0, 1});
  CHECK(a == b);
}

TEST_CASE("missing_rates counts per column") {
  SECTION("no missing cells") {
    const auto s = ObservationSet::from_rows({{1, 2}, {3, 4}, {5, 6}, {7, 8}});
    CHECK(missing_rates(s).rates == std::vector<double>{0.0, 0.0});
  }
  SECTION("column fully missing") {
    const auto s = ObservationSet::from_rows({{NaN, 2}, {NaN, 4}, {NaN, 6}, {NaN, 8}});
    CHECK(missing_rates(s).rates == std::vector<double>{1.0, 0.0});
  }
  SECTION("two of ten") {
    std::vector<std::vector<double>> rows(10, {1.0});
    rows[2][0] = NaN;
    rows[7][0] = NaN;
    CHECK(missing_rates(ObservationSet::from_rows(rows)).rates == std::vector<double>{0.2});
  }
}

TEST_CASE("split_complete_missing partitions rows and keeps indices") {
  const auto s = ObservationSet::from_rows({{0, 0}, {1, NaN}, {2, 2}, {NaN, 3}, {4, 4}});
  const auto parts = split_complete_missing(s);
  CHECK(parts.complete.row_ids() == std::vector<std::size_t>{0, 2, 4});
  CHECK(parts.incomplete.row_ids() == std::vector<std::size_t>{1, 3});
  CHECK(parts.complete.value(1, 0) == 2.0);
  CHECK(merge_by_row_ids(parts.complete, parts.incomplete) == s);

  const auto full = ObservationSet::from_rows({{1, 2}, {3, 4}});
  const auto p2 = split_complete_missing(full);
  CHECK(p2.complete == full);
  CHECK(p2.incomplete.rows() == 0);

  const auto none = ObservationSet::from_rows({{NaN, 1}, {2, NaN}});
  try {
    split_complete_missing(none);
    FAIL("expected NoCompleteRows");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoCompleteRows);
  }
}

TEST_CASE("split then merge reproduces random sets") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto base = uniform_set(30, 4, seed);
    const auto masked = mask_values(base, {{0.3, 0.1, 0.0, 0.2}}, RandomSource(seed + 100));
    bool any_complete = false;
    for (std::size_t i = 0; i < masked.rows(); ++i) any_complete |= masked.row_complete(i);
    if (!any_complete) continue;
    const auto parts = split_complete_missing(masked);
    CHECK(merge_by_row_ids(parts.complete, parts.incomplete) == masked);
  }
}

TEST_CASE("euclidean_distance") {
  const std::vector<double> o{0, 0}, p{3, 4};
  CHECK(euclidean_distance(o, p) == 5.0);
  CHECK(euclidean_distance(p, p) == 0.0);
  const std::vector<double> a{1, NaN}, b{1, 1};
  try {
    euclidean_distance(a, b);
    FAIL("expected MissingValueInDistance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingValueInDistance);
  }
  CHECK_THROWS_AS(euclidean_distance(std::vector<double>{1.0}, b), Error);
}

TEST_CASE("euclidean_distance is a metric on random triples") {
  auto e = RandomSource(7).engine();
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> x(6), y(6), z(6);
    for (auto* v : {&x, &y, &z})
      for (auto& c : *v) c = e.uniform() * 20 - 10;
    const double xy = euclidean_distance(x, y), yz = euclidean_distance(y, z), xz = euclidean_distance(x, z);
    CHECK(xz <= (xy + yz) * (1 + 1e-12));
    CHECK(xy == euclidean_distance(y, x));
    CHECK(xy > 0.0);
  }
}

TEST_CASE("mask_values") {
  const auto data = uniform_set(100, 100, 3);
  SECTION("zero rates keep the set") {
    CHECK(mask_values(data, {std::vector<double>(100, 0.0)}, RandomSource(1)) == data);
  }
  SECTION("unit rates mask every cell") {
    const auto all = mask_values(data, {std::vector<double>(100, 1.0)}, RandomSource(1));
    CHECK(all.missing_count() == 100 * 100);
  }
  SECTION("empirical rate within binomial bound") {
    // 10^4 cells at p = 0.2: sd = 0.004, 0.015 is beyond 3.7 sd.
    const auto m = mask_values(data, {std::vector<double>(100, 0.2)}, RandomSource(11));
    CHECK_THAT(static_cast<double>(m.missing_count()) / 1e4, WithinAbs(0.2, 0.015));
  }
  SECTION("bit reproducible for a fixed source") {
    const MissingRateVector r{std::vector<double>(100, 0.3)};
    CHECK(mask_values(data, r, RandomSource(5)) == mask_values(data, r, RandomSource(5)));
    CHECK_FALSE(mask_values(data, r, RandomSource(5)) == mask_values(data, r, RandomSource(6)));
  }
  SECTION("present cells are unchanged") {
    const auto m = mask_values(data, {std::vector<double>(100, 0.5)}, RandomSource(2));
    for (std::size_t i = 0; i < 100; ++i)
      for (std::size_t j = 0; j < 100; ++j)
        if (!m.is_missing(i, j)) CHECK(m.value(i, j) == data.value(i, j));
  }
  CHECK_THROWS_AS(mask_values(data, {std::vector<double>(3, 0.1)}, RandomSource(1)), Error);
}

TEST_CASE("RandomSource streams are deterministic and derived streams differ") {
  auto a = RandomSource(99).engine();
  auto b = RandomSource(99).engine();
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CHECK(RandomSource(99).derive(1) == RandomSource(99).derive(1));
  CHECK_FALSE(RandomSource(99).derive(1) == RandomSource(99).derive(2));
  CHECK_FALSE(RandomSource(99).derive({1, 2}) == RandomSource(99).derive({2, 1}));
  CHECK(RandomSource(1).algorithm() == "splitmix64-counter/v1");

  auto e = RandomSource(4).engine();
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = e.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK_THAT(sum / 100000, WithinAbs(0.5, 0.005));
}

TEST_CASE("CSV round trip with missing tokens") {
  std::istringstream in("\xEF\xBB\xBF" "a,b,c\n1,,3\nNaN,2.5,+4\n7,8,nan\n");
  const auto s = read_csv(in);
  REQUIRE(s.rows() == 3);
  CHECK(s.column_names() == std::vector<std::string>{"a", "b", "c"});
  CHECK(s.is_missing(0, 1));
  CHECK(s.is_missing(1, 0));
  CHECK(s.is_missing(2, 2));
  CHECK(s.value(1, 2) == 4.0);

  std::ostringstream out;
  write_csv(out, s);
  std::istringstream back(out.str());
  CHECK(read_csv(back) == s);

  const auto r = uniform_set(5, 3, 1);
  std::ostringstream o2;
  write_csv(o2, r);
  std::istringstream b2(o2.str());
  CHECK(read_csv(b2) == r);
}

TEST_CASE("CSV rejects malformed input") {
  auto code_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_csv(in);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of("a,b\n1,2\n,\n") == ErrorCode::DegenerateRow);
  CHECK(code_of("a,b\n1,2,3\n") == ErrorCode::ParseError);
  CHECK(code_of("a,b\n1,x\n") == ErrorCode::ParseError);
  CHECK(code_of("a,b\n") == ErrorCode::ParseError);
  CHECK(code_of("") == ErrorCode::ParseError);
}
