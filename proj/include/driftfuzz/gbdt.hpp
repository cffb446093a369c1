#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "driftfuzz/error.hpp"
#include "driftfuzz/random.hpp"

namespace driftfuzz {

/// Dense row-major feature matrix; NaN (any payload) marks a missing cell.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) fail(ErrorCode::InvalidArgument, "feature buffer does not match shape");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

  FeatureMatrix select_rows(std::span<const std::size_t> idx) const {
    FeatureMatrix out(idx.size(), cols_);
    for (std::size_t r = 0; r < idx.size(); ++r) std::copy_n(row(idx[r]).begin(), cols_, out.row(r).begin());
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct GbdtParams {
  int n_trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  double feature_subsample = 1.0;

  void validate() const {
    if (n_trees < 1 || max_depth < 1 || min_samples_leaf < 1)
      fail(ErrorCode::InvalidArgument, "gbdt n_trees, max_depth and min_samples_leaf must be positive");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
      fail(ErrorCode::InvalidArgument, "gbdt learning_rate must lie in (0, 1]");
    if (!(feature_subsample > 0.0 && feature_subsample <= 1.0))
      fail(ErrorCode::InvalidArgument, "gbdt feature_subsample must lie in (0, 1]");
  }
  friend bool operator==(const GbdtParams&, const GbdtParams&) = default;
};

/// Internal nodes route x < threshold to the left child; missing values
/// follow default_left. A node with feature < 0 is a leaf.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  bool default_left = false;
  int left = -1;
  int right = -1;
  double value = 0.0;
  double gain = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  std::size_t leaf_index(std::span<const double> row) const noexcept {
    std::size_t at = 0;
    while (!nodes[at].is_leaf()) {
      const auto& nd = nodes[at];
      const double x = row[static_cast<std::size_t>(nd.feature)];
      const bool go_left = std::isnan(x) ? nd.default_left : x < nd.threshold;
      at = static_cast<std::size_t>(go_left ? nd.left : nd.right);
    }
    return at;
  }
  double predict(std::span<const double> row) const noexcept { return nodes[leaf_index(row)].value; }
};

struct GbdtModel {
  std::vector<RegressionTree> trees;
  double learning_rate = 0.1;
  double base_prediction = 0.0;
  std::size_t feature_count = 0;
  /// Set when all training targets were equal; the model is then constant.
  bool degenerate_targets = false;
};

struct GbdtFitReport {
  /// Training RMSE after 0, 1, ..., n_trees trees.
  std::vector<double> training_rmse;
  std::vector<std::string> warnings;
};

inline double gbdt_predict(const GbdtModel& model, std::span<const double> row) {
  if (row.size() != model.feature_count)
    fail(ErrorCode::LengthMismatch, "row has " + std::to_string(row.size()) + " features, model expects " +
                                        std::to_string(model.feature_count));
  double s = 0.0;
  for (const auto& t : model.trees) s += t.predict(row);
  return model.base_prediction + model.learning_rate * s;
}

namespace gbdt_detail {

struct SortedColumn {
  std::vector<std::uint32_t> present_rows;  // ascending by value, ties by row
  std::vector<double> present_values;
  std::vector<std::uint32_t> missing_rows;
};

inline std::vector<SortedColumn> presort(const FeatureMatrix& x) {
  std::vector<SortedColumn> cols(x.cols());
  std::vector<std::uint32_t> order;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& c = cols[f];
    order.clear();
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (std::isnan(x(i, f)))
        c.missing_rows.push_back(static_cast<std::uint32_t>(i));
      else
        order.push_back(static_cast<std::uint32_t>(i));
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    c.present_rows = order;
    c.present_values.reserve(order.size());
    for (auto i : order) c.present_values.push_back(x(i, f));
  }
  return cols;
}

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  bool default_left = false;
  double gain = 0.0;
};

struct NodeScan {
  double left_sum = 0.0;
  std::size_t left_count = 0;
  double missing_sum = 0.0;
  std::size_t missing_count = 0;
  double last_value = 0.0;
};

}  // namespace gbdt_detail

/// Least-squares gradient boosting with exact greedy depth-wise trees.
///
/// Every tree fits the current residuals; each split is the threshold (a
/// midpoint between adjacent distinct present values) and missing-value
/// direction with the largest reduction in squared error. A split that sends
/// all present values one way and all missing values the other is also a
/// candidate, so missingness itself can be learned. Leaves hold the mean
/// residual, which makes training RMSE non-increasing in tree count.
inline GbdtModel gbdt_fit(const FeatureMatrix& x, std::span<const double> targets, const GbdtParams& params,
                          RandomSource rng, GbdtFitReport* report = nullptr) {
  params.validate();
  const std::size_t m = x.rows();
  const std::size_t nf = x.cols();
  if (targets.size() != m) fail(ErrorCode::LengthMismatch, "target count != row count");
  const auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);
  if (m < 2 * min_leaf)
    fail(ErrorCode::TooFewRows, "gbdt needs at least 2*min_samples_leaf = " + std::to_string(2 * min_leaf) +
                                    " rows, got " + std::to_string(m));
  for (double t : targets)
    if (!std::isfinite(t)) fail(ErrorCode::InvalidArgument, "non-finite gbdt target");

  GbdtFitReport local;
  GbdtFitReport& rep = report ? *report : local;
  rep = {};

  GbdtModel model;
  model.learning_rate = params.learning_rate;
  model.feature_count = nf;
  model.base_prediction = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(m);

  const auto [tmin, tmax] = std::minmax_element(targets.begin(), targets.end());
  if (*tmin == *tmax) {
    model.base_prediction = *tmin;
    model.degenerate_targets = true;
    rep.warnings.push_back("DegenerateTargets: all targets equal, returning a constant model");
    rep.training_rmse.push_back(0.0);
    return model;
  }

  const auto columns = gbdt_detail::presort(x);
  std::vector<double> residual(m);
  for (std::size_t i = 0; i < m; ++i) residual[i] = targets[i] - model.base_prediction;
  auto sse = [&] {
    double s = 0.0;
    for (double r : residual) s += r * r;
    return s;
  };
  double current_sse = sse();
  rep.training_rmse.push_back(std::sqrt(current_sse / static_cast<double>(m)));

  auto engine = rng.engine();
  std::vector<std::size_t> all_features(nf);
  std::iota(all_features.begin(), all_features.end(), 0);
  const std::size_t per_tree =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(params.feature_subsample * static_cast<double>(nf))));

  std::vector<std::uint32_t> node_of(m);
  std::vector<double> node_sum;
  std::vector<std::size_t> node_count;
  std::vector<gbdt_detail::NodeScan> scan;
  std::vector<gbdt_detail::Candidate> best;
  std::vector<char> splittable;

  model.trees.reserve(static_cast<std::size_t>(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t) {
    std::vector<std::size_t> features = all_features;
    if (per_tree < nf) {
      for (std::size_t a = 0; a < per_tree; ++a) {
        const std::size_t b = a + static_cast<std::size_t>(engine.uniform() * static_cast<double>(nf - a));
        std::swap(features[a], features[std::min(b, nf - 1)]);
      }
      features.resize(per_tree);
      std::sort(features.begin(), features.end());
    }

    RegressionTree tree;
    tree.nodes.emplace_back();
    std::fill(node_of.begin(), node_of.end(), 0);
    node_sum.assign(1, std::accumulate(residual.begin(), residual.end(), 0.0));
    node_count.assign(1, m);
    const double min_gain = 1e-12 * current_sse;

    std::vector<std::size_t> frontier{0};
    for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
      const std::size_t n_nodes = tree.nodes.size();
      splittable.assign(n_nodes, 0);
      bool any = false;
      for (auto nd : frontier)
        if (node_count[nd] >= 2 * min_leaf) splittable[nd] = any = 1;
      if (!any) break;
      best.assign(n_nodes, {});
      scan.assign(n_nodes, {});

      for (auto f : features) {
        const auto& col = columns[f];
        for (auto nd : frontier) scan[nd] = {};
        for (auto i : col.missing_rows) {
          auto& s = scan[node_of[i]];
          s.missing_sum += residual[i];
          ++s.missing_count;
        }
        auto consider = [&](std::size_t nd, double threshold, bool pure_missing_split) {
          const auto& s = scan[nd];
          const double total = node_sum[nd];
          const std::size_t count = node_count[nd];
          const double parent = total * total / static_cast<double>(count);
          auto eval = [&](double ls, std::size_t lc, bool default_left) {
            const std::size_t rc = count - lc;
            if (lc < min_leaf || rc < min_leaf) return;
            const double rs = total - ls;
            const double gain = ls * ls / static_cast<double>(lc) + rs * rs / static_cast<double>(rc) - parent;
            if (gain > best[nd].gain && gain > min_gain)
              best[nd] = {static_cast<int>(f), threshold, default_left, gain};
          };
          if (pure_missing_split) {
            eval(s.left_sum, s.left_count, false);
            return;
          }
          if (s.missing_count == 0) {
            // No training rows are missing here: unseen missing values follow
            // the larger child.
            eval(s.left_sum, s.left_count, 2 * s.left_count >= count);
            return;
          }
          eval(s.left_sum, s.left_count, false);
          eval(s.left_sum + s.missing_sum, s.left_count + s.missing_count, true);
        };

        const std::size_t np = col.present_rows.size();
        for (std::size_t r = 0; r < np; ++r) {
          const auto i = col.present_rows[r];
          const auto nd = node_of[i];
          if (!splittable[nd]) continue;
          auto& s = scan[nd];
          const double v = col.present_values[r];
          if (s.left_count > 0 && v > s.last_value) consider(nd, s.last_value + 0.5 * (v - s.last_value), false);
          s.left_sum += residual[i];
          ++s.left_count;
          s.last_value = v;
        }
        for (auto nd : frontier) {
          if (!splittable[nd]) continue;
          const auto& s = scan[nd];
          if (s.missing_count > 0 && s.left_count > 0)
            consider(nd, std::numeric_limits<double>::infinity(), true);
        }
      }

      std::vector<std::size_t> next;
      for (auto nd : frontier) {
        if (!splittable[nd] || best[nd].feature < 0) continue;
        auto& node = tree.nodes[nd];
        node.feature = best[nd].feature;
        node.threshold = best[nd].threshold;
        node.default_left = best[nd].default_left;
        node.gain = best[nd].gain;
        node.left = static_cast<int>(tree.nodes.size());
        node.right = node.left + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        next.push_back(static_cast<std::size_t>(node.left));
        next.push_back(static_cast<std::size_t>(node.right));
      }
      if (next.empty()) break;
      node_sum.resize(tree.nodes.size(), 0.0);
      node_count.resize(tree.nodes.size(), 0);
      for (auto nd : next) {
        node_sum[nd] = 0.0;
        node_count[nd] = 0;
      }
      for (std::size_t i = 0; i < m; ++i) {
        const auto& node = tree.nodes[node_of[i]];
        if (node.is_leaf()) continue;
        const double v = x(i, static_cast<std::size_t>(node.feature));
        const bool go_left = std::isnan(v) ? node.default_left : v < node.threshold;
        const auto child = static_cast<std::uint32_t>(go_left ? node.left : node.right);
        node_of[i] = child;
        node_sum[child] += residual[i];
        ++node_count[child];
      }
      frontier = std::move(next);
    }

    for (std::size_t nd = 0; nd < tree.nodes.size(); ++nd) {
      auto& node = tree.nodes[nd];
      if (node.is_leaf() && node_count[nd] > 0) node.value = node_sum[nd] / static_cast<double>(node_count[nd]);
    }
    for (std::size_t i = 0; i < m; ++i) residual[i] -= params.learning_rate * tree.nodes[node_of[i]].value;
    const double next_sse = sse();
    assert(next_sse <= current_sse * (1.0 + 1e-9) + 1e-300);
    current_sse = next_sse;
    rep.training_rmse.push_back(std::sqrt(current_sse / static_cast<double>(m)));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

/// Per-feature total split gain, normalized to sum to one (all zeros for a
/// model without splits).
inline std::vector<double> feature_importance(const GbdtModel& model) {
  std::vector<double> out(model.feature_count, 0.0);
  for (const auto& t : model.trees)
    for (const auto& nd : t.nodes)
      if (!nd.is_leaf()) out[static_cast<std::size_t>(nd.feature)] += nd.gain;
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (total > 0.0)
    for (auto& v : out) v /= total;
  return out;
}

}  // namespace driftfuzz
