#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "driftfuzz/cluster.hpp"
#include "driftfuzz/random.hpp"

using namespace driftfuzz;
using Catch::Matchers::WithinAbs;

namespace {

ObservationSet two_clouds(std::size_t per, std::uint64_t seed) {
  auto e = RandomSource(seed).engine();
  std::vector<double> v;
  for (std::size_t i = 0; i < 2 * per; ++i) {
    const double c = i < per ? -10.0 : 10.0;
    v.push_back(c + e.uniform() - 0.5);
    v.push_back(c + e.uniform() - 0.5);
  }
  return ObservationSet(2 * per, 2, std::move(v), {});
}

Partition manual(std::vector<double> c, std::size_t dims) {
  Partition p;
  p.dims = dims;
  p.k = c.size() / dims;
  p.centroids = std::move(c);
  return p;
}

}  // namespace

TEST_CASE("K equal to the row count puts every row on its own centroid") {
  const auto s = ObservationSet::from_rows({{0, 0}, {1, 5}, {-3, 2}, {8, 8}});
  const auto p = kmeans_fit(s, 4, RandomSource(1));
  CHECK(p.inertia == 0.0);
  std::vector<bool> used(4, false);
  for (std::size_t i = 0; i < 4; ++i) used[assign_nearest(p, s.row(i))] = true;
  CHECK(std::all_of(used.begin(), used.end(), [](bool b) { return b; }));
}

TEST_CASE("two separated clouds are recovered") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = kmeans_fit(two_clouds(100, seed), 2, RandomSource(seed + 50));
    for (std::size_t z = 0; z < 2; ++z) {
      const double cx = p.centroid(z)[0];
      const double target = cx < 0 ? -10.0 : 10.0;
      CHECK_THAT(cx, WithinAbs(target, 0.5));
      CHECK_THAT(p.centroid(z)[1], WithinAbs(target, 0.5));
    }
    CHECK(p.centroid(0)[0] * p.centroid(1)[0] < 0.0);
  }
}

TEST_CASE("kmeans rejects bad K and missing data") {
  const auto s = ObservationSet::from_rows({{0}, {1}, {2}});
  auto code = [&](std::size_t k) {
    try {
      kmeans_fit(s, k, RandomSource(0));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code(1) == ErrorCode::KTooSmall);
  CHECK(code(4) == ErrorCode::KTooLarge);
  const auto holes = ObservationSet::from_rows({{0}, {std::nan("")}, {2}});
  CHECK_THROWS_AS(kmeans_fit(holes, 2, RandomSource(0)), Error);
}

TEST_CASE("assign_nearest") {
  const auto p = manual({0, 0, 2, 0}, 2);
  const std::vector<double> mid{1, 0}, hit{2, 0}, near0{0.4, 3};
  CHECK(assign_nearest(p, mid) == 0);
  CHECK(assign_nearest(p, hit) == 1);
  CHECK(assign_nearest(p, near0) == 0);
  const auto line = manual({-1, 4, 9}, 1);
  CHECK(assign_nearest(line, std::vector<double>{5.0}) == 1);
  CHECK(assign_nearest(line, std::vector<double>{7.0}) == 2);
  CHECK_THROWS_AS(assign_nearest(line, std::vector<double>{1.0, 2.0}), Error);
}

TEST_CASE("default_bin_count") {
  CHECK(default_bin_count(1000) == 20);
  CHECK(default_bin_count(100) == 2);
  CHECK(default_bin_count(149) == 2);
  CHECK_THROWS_AS(default_bin_count(99), Error);
}

TEST_CASE("kmeans is deterministic and centroids map to themselves") {
  auto e = RandomSource(8).engine();
  std::vector<double> v(300 * 3);
  for (auto& x : v) x = e.uniform() * 6;
  const ObservationSet s(300, 3, std::move(v), {});
  const auto a = kmeans_fit(s, 6, RandomSource(3));
  const auto b = kmeans_fit(s, 6, RandomSource(3));
  CHECK(a.centroids == b.centroids);
  CHECK(a.inertia == b.inertia);
  for (std::size_t z = 0; z < a.k; ++z) CHECK(assign_nearest(a, a.centroid(z)) == z);

  double inertia = 0.0;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const auto c = a.centroid(assign_nearest(a, s.row(i)));
    for (std::size_t j = 0; j < 3; ++j) inertia += (s.value(i, j) - c[j]) * (s.value(i, j) - c[j]);
  }
  CHECK_THAT(a.inertia, WithinAbs(inertia, 1e-9 * inertia));
}
