#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "driftfuzz/cluster.hpp"
#include "driftfuzz/mdl.hpp"
#include "driftfuzz/synth.hpp"

using namespace driftfuzz;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ObservationSet gaussian_rows(std::size_t m, std::uint64_t seed) {
  const auto spec = table1_spec(Family::Gaussian, RandomSource(seed));
  return generate(spec, m, RandomSource(seed).derive(1));
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += (a[i] - ma) * (b[i] - mb);
    aa += (a[i] - ma) * (a[i] - ma);
    bb += (b[i] - mb) * (b[i] - mb);
  }
  return ab / std::sqrt(aa * bb);
}

MdlOptions quick() {
  MdlOptions o;
  o.max_pairs = 3000;
  return o;
}

}  // namespace

TEST_CASE("zero rates make every imputed distance equal the target") {
  const auto data = gaussian_rows(30, 1);
  const auto set = build_pair_training_set(data, half_mcar_rates(10, 0.0), default_pool(), RandomSource(2));
  REQUIRE(set.size() == 30 * 29 / 2);
  for (std::size_t r = 0; r < set.size(); ++r) {
    const auto row = set.row(r);
    for (double d : row.imputed_distances) CHECK_THAT(d, WithinAbs(row.target, 1e-12));
    CHECK(std::none_of(row.raw.begin(), row.raw.end(), [](double v) { return std::isnan(v); }));
  }
}

TEST_CASE("pair subsampling keeps distinct ordered pairs") {
  const auto data = gaussian_rows(20, 3);
  const auto full = build_pair_training_set(data, half_mcar_rates(10), default_pool(), RandomSource(1));
  CHECK(full.size() == 190);
  const auto sub = build_pair_training_set(data, half_mcar_rates(10), default_pool(), RandomSource(1), 50);
  REQUIRE(sub.size() == 50);
  std::set<std::pair<std::size_t, std::size_t>> seen(sub.pairs.begin(), sub.pairs.end());
  CHECK(seen.size() == 50);
  CHECK(std::is_sorted(sub.pairs.begin(), sub.pairs.end()));
  for (const auto& [i, j] : sub.pairs) {
    CHECK(i < j);
    CHECK(j < 20);
  }
  for (std::size_t r = 0; r < sub.size(); ++r) {
    const auto [i, j] = sub.pairs[r];
    CHECK_THAT(sub.targets[r], WithinRel(euclidean_distance(data.row(i), data.row(j)), 1e-12));
  }
  CHECK(sub.layout.width() == 2 * 10 + 5);
}

TEST_CASE("mean-imputed distance tracks the true distance") {
  std::vector<double> rs;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = gaussian_rows(120, seed + 10);
    const auto set = build_pair_training_set(data, half_mcar_rates(10), default_pool(), RandomSource(seed));
    std::vector<double> feat, target;
    for (std::size_t r = 0; r < set.size(); ++r) {
      feat.push_back(set.row(r).imputed_distances[1]);
      target.push_back(set.targets[r]);
    }
    rs.push_back(correlation(feat, target));
  }
  std::sort(rs.begin(), rs.end());
  CHECK(rs[2] > 0.8);
}

TEST_CASE("pair training set rejects small or empty inputs") {
  const auto data = gaussian_rows(19, 0);
  CHECK_THROWS_AS(build_pair_training_set(data, half_mcar_rates(10), default_pool(), RandomSource(0)), Error);
  const auto ok = gaussian_rows(25, 0);
  CHECK_THROWS_AS(build_pair_training_set(ok, half_mcar_rates(10), ImputerPool{}, RandomSource(0)), Error);
}

TEST_CASE("sigma_from_residuals") {
  CHECK_THAT(sigma_from_residuals(std::vector<double>{1, -1, 2}), WithinAbs(std::sqrt(6.0), 1e-15));
  CHECK(sigma_from_residuals(std::vector<double>{0, 0, 0, 0}) == 0.0);
  try {
    sigma_from_residuals(std::vector<double>{1, 2});
    FAIL("expected TooFewResiduals");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewResiduals);
  }
  auto e = RandomSource(5).engine();
  for (int t = 0; t < 50; ++t) {
    std::vector<double> r(3 + t * 7);
    for (auto& v : r) v = e.uniform() * 4 - 2;
    // Welford-style running mean of squares.
    double mean_sq = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) mean_sq += (r[i] * r[i] - mean_sq) / static_cast<double>(i + 1);
    const double n = static_cast<double>(r.size());
    CHECK_THAT(sigma_from_residuals(r), WithinAbs(std::sqrt(mean_sq * n / (n - 2)), 1e-12));
  }
}

TEST_CASE("kfold_partition splits exactly") {
  const auto folds = kfold_partition(100, 5, RandomSource(3));
  REQUIRE(folds.size() == 5);
  std::vector<int> hits(100, 0);
  for (const auto& f : folds) {
    CHECK(f.size() == 20);
    for (auto i : f) ++hits[i];
  }
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  const auto uneven = kfold_partition(103, 5, RandomSource(3));
  std::size_t total = 0;
  for (const auto& f : uneven) {
    CHECK((f.size() == 20 || f.size() == 21));
    total += f.size();
  }
  CHECK(total == 103);
  CHECK(kfold_partition(100, 5, RandomSource(3)) == folds);
  CHECK_THROWS_AS(kfold_partition(3, 5, RandomSource(0)), Error);
  CHECK_THROWS_AS(kfold_partition(10, 1, RandomSource(0)), Error);
}

TEST_CASE("complete training data gives a small spread") {
  const auto data = gaussian_rows(200, 7);
  MdlTrainingReport rep;
  const auto model = train_masked_distance(data, default_pool(), quick(), RandomSource(1), &rep);
  const double mean_target =
      std::accumulate(rep.pairs.targets.begin(), rep.pairs.targets.end(), 0.0) / static_cast<double>(rep.pairs.size());
  CHECK(model.sigma_mask > 0.0);
  CHECK(model.sigma_mask < 0.05 * mean_target);
  CHECK(model.pair_count == 3000);
}

TEST_CASE("held-out errors obey the three-sigma rule") {
  const auto full = gaussian_rows(300, 11);
  const auto masked = mask_values(full, half_mcar_rates(10), RandomSource(12));
  MdlTrainingReport rep;
  const auto model = train_masked_distance(masked, default_pool(), quick(), RandomSource(2), &rep);
  CHECK_THAT(model.sigma_mask, WithinRel(rep.raw_sigma, 1e-12));
  std::size_t inside = 0;
  for (std::size_t r = 0; r < rep.pairs.size(); ++r)
    inside += std::abs(rep.pairs.targets[r] - rep.heldout_predictions[r]) <= 3 * model.sigma_mask ? 1 : 0;
  CHECK(static_cast<double>(inside) / static_cast<double>(rep.pairs.size()) >= 0.90);

  const auto part = kmeans_fit(split_complete_missing(full).complete, 10, RandomSource(4));
  std::size_t ok = 0;
  const std::size_t rows = 200;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto x = full.row(i);
    std::vector<std::span<const double>> imputed(model.layout.pool.size(), x);
    const auto est = estimate_distances(model, x, part, imputed);
    REQUIRE(est.size() == 10);
    bool all = true;
    for (std::size_t z = 0; z < 10; ++z) {
      CHECK(est[z].sigma == model.sigma_mask);
      CHECK(est[z].d_hat >= 0.0);
      all &= std::abs(est[z].d_hat - euclidean_distance(x, part.centroid(z))) <= 3 * model.sigma_mask;
    }
    ok += all ? 1 : 0;
  }
  CHECK(static_cast<double>(ok) / rows >= 0.95);
}

TEST_CASE("estimation rows and clamping") {
  FeatureLayout layout{2, default_pool()};
  const double nan = std::nan("");
  const std::vector<double> x{3.0, nan};
  const std::vector<double> zero_imputed{3.0, 0.0};
  const std::vector<double> mean_imputed{3.0, 1.0};
  const std::vector<double> centroid{3.0, 0.0};
  std::vector<std::span<const double>> imputed{zero_imputed, mean_imputed, mean_imputed, mean_imputed, mean_imputed};
  std::vector<double> out(layout.width());
  build_estimation_row(layout, x, imputed, centroid, out);
  CHECK(out[0] == 3.0);
  CHECK(std::isnan(out[1]));
  CHECK(out[2] == 3.0);
  CHECK(out[3] == 0.0);
  CHECK(out[4] == 0.0);
  CHECK(out[5] == 1.0);

  DistanceModel model;
  model.layout = layout;
  model.learner.feature_count = layout.width();
  model.learner.base_prediction = -0.3;
  model.sigma_mask = 0.1;
  CHECK(predict_distance(model, out) == 0.0);

  Partition p;
  p.k = 1;
  p.dims = 3;
  p.centroids = {0, 0, 0};
  CHECK_THROWS_AS(estimate_distances(model, x, p, imputed), Error);
  std::vector<std::span<const double>> short_pool{zero_imputed};
  p.dims = 2;
  p.centroids = {0, 0};
  CHECK_THROWS_AS(estimate_distances(model, x, p, short_pool), Error);
}

TEST_CASE("missing rates without complete rows are rejected") {
  const auto data = ObservationSet::from_rows({{std::nan(""), 1}, {1, std::nan("")}});
  CHECK_THROWS_AS(train_masked_distance(data, default_pool(), quick(), RandomSource(0)), Error);
}
