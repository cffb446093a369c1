#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driftfuzz/cluster.hpp"
#include "driftfuzz/error.hpp"
#include "driftfuzz/gbdt.hpp"
#include "driftfuzz/harness.hpp"
#include "driftfuzz/impute.hpp"
#include "driftfuzz/mdl.hpp"
#include "driftfuzz/stats.hpp"
#include "driftfuzz/synth.hpp"

namespace driftfuzz {

using json = nlohmann::json;

namespace json_detail {

/// Non-finite doubles travel as the strings "inf", "-inf" and "nan".
inline json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double to_number(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  fail(ErrorCode::ParseError, std::string("field '") + what + "' must be a number");
}

inline const json& at(const json& j, const char* key) {
  if (!j.is_object()) fail(ErrorCode::ParseError, std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  return *it;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return at(j, key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

inline double get_number(const json& j, const char* key) { return to_number(at(j, key), key); }

}  // namespace json_detail

// --- Partition -------------------------------------------------------------

inline json to_json(const Partition& p) {
  json rows = json::array();
  for (std::size_t z = 0; z < p.k; ++z) {
    json r = json::array();
    for (double v : p.centroid(z)) r.push_back(v);
    rows.push_back(std::move(r));
  }
  return {{"k", p.k}, {"dims", p.dims}, {"centroids", rows}, {"inertia", p.inertia}, {"iterations", p.iterations}};
}

inline Partition partition_from_json(const json& j) {
  using namespace json_detail;
  Partition p;
  p.k = get<std::size_t>(j, "k");
  p.dims = get<std::size_t>(j, "dims");
  const auto& rows = at(j, "centroids");
  if (!rows.is_array() || rows.size() != p.k)
    fail(ErrorCode::ParseError, "centroids must be an array of k rows");
  if (p.k < 2) fail(ErrorCode::ParseError, "partition needs k >= 2");
  if (p.dims < 1) fail(ErrorCode::ParseError, "partition needs dims >= 1");
  for (const auto& r : rows) {
    if (!r.is_array() || r.size() != p.dims) fail(ErrorCode::ParseError, "centroid rows must have dims entries");
    for (const auto& v : r) {
      const double x = to_number(v, "centroids");
      if (!std::isfinite(x)) fail(ErrorCode::ParseError, "centroids must be finite");
      p.centroids.push_back(x);
    }
  }
  if (j.contains("inertia")) p.inertia = get_number(j, "inertia");
  if (j.contains("iterations")) p.iterations = get<int>(j, "iterations");
  return p;
}

// --- Gradient-boosted trees ----------------------------------------------

inline json to_json(const GbdtModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      if (n.is_leaf())
        nodes.push_back({{"value", n.value}});
      else
        nodes.push_back({{"feature", n.feature},
                         {"threshold", json_detail::number(n.threshold)},
                         {"default_left", n.default_left},
                         {"left", n.left},
                         {"right", n.right},
                         {"gain", n.gain}});
    }
    trees.push_back(std::move(nodes));
  }
  return {{"learning_rate", m.learning_rate},       {"base_prediction", m.base_prediction},
          {"feature_count", m.feature_count},       {"degenerate_targets", m.degenerate_targets},
          {"trees", std::move(trees)}};
}

/// Parses and structurally checks a model: child links must point forward
/// inside the tree and features must exist.
inline GbdtModel gbdt_from_json(const json& j) {
  using namespace json_detail;
  GbdtModel m;
  m.learning_rate = get_number(j, "learning_rate");
  m.base_prediction = get_number(j, "base_prediction");
  m.feature_count = get<std::size_t>(j, "feature_count");
  m.degenerate_targets = get<bool>(j, "degenerate_targets");
  const auto& trees = at(j, "trees");
  if (!trees.is_array()) fail(ErrorCode::ParseError, "trees must be an array");
  for (const auto& tj : trees) {
    if (!tj.is_array() || tj.empty()) fail(ErrorCode::ParseError, "each tree must be a non-empty node array");
    RegressionTree t;
    const int count = static_cast<int>(tj.size());
    for (int idx = 0; idx < count; ++idx) {
      const auto& nj = tj[static_cast<std::size_t>(idx)];
      TreeNode n;
      if (nj.contains("feature")) {
        n.feature = get<int>(nj, "feature");
        n.threshold = get_number(nj, "threshold");
        n.default_left = get<bool>(nj, "default_left");
        n.left = get<int>(nj, "left");
        n.right = get<int>(nj, "right");
        if (nj.contains("gain")) n.gain = get_number(nj, "gain");
        if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= m.feature_count)
          fail(ErrorCode::ParseError, "tree node feature index out of range");
        if (n.left <= idx || n.right <= idx || n.left >= count || n.right >= count)
          fail(ErrorCode::ParseError, "tree node child index out of range");
      } else {
        n.value = get_number(nj, "value");
      }
      t.nodes.push_back(n);
    }
    m.trees.push_back(std::move(t));
  }
  return m;
}

// --- Distance model ------------------------------------------------------

inline json to_json(const ImputeMethod& m) {
  return {{"kind", std::string(to_string(m.kind))},
          {"iterative_max_rounds", m.iterative_max_rounds},
          {"iterative_tolerance", m.iterative_tolerance}};
}

inline ImputeMethod impute_method_from_json(const json& j) {
  using namespace json_detail;
  ImputeMethod m;
  m.kind = parse_impute_kind(get<std::string>(j, "kind"));
  if (j.contains("iterative_max_rounds")) m.iterative_max_rounds = get<int>(j, "iterative_max_rounds");
  if (j.contains("iterative_tolerance")) m.iterative_tolerance = get_number(j, "iterative_tolerance");
  return m;
}

inline json to_json(const DistanceModel& d) {
  json pool = json::array();
  for (const auto& p : d.layout.pool) pool.push_back(to_json(p));
  return {{"sigma_mask", d.sigma_mask},
          {"layout", {{"raw_dims", d.layout.raw_dims}, {"pool", pool}}},
          {"training_rates", d.training_rates.rates},
          {"pair_count", d.pair_count},
          {"cv_mae", d.cv_mae},
          {"cv_rmse", d.cv_rmse},
          {"learner", to_json(d.learner)}};
}

inline DistanceModel distance_model_from_json(const json& j) {
  using namespace json_detail;
  DistanceModel d;
  d.sigma_mask = get_number(j, "sigma_mask");
  if (!(d.sigma_mask > 0.0)) fail(ErrorCode::NonPositiveSigma, "sigma_mask must be positive");
  const auto& layout = at(j, "layout");
  d.layout.raw_dims = get<std::size_t>(layout, "raw_dims");
  const auto& pool = at(layout, "pool");
  if (!pool.is_array() || pool.empty()) fail(ErrorCode::ParseError, "layout pool must be a non-empty array");
  for (const auto& p : pool) d.layout.pool.push_back(impute_method_from_json(p));
  d.training_rates.rates = get<std::vector<double>>(j, "training_rates");
  d.pair_count = get<std::size_t>(j, "pair_count");
  d.cv_mae = get_number(j, "cv_mae");
  d.cv_rmse = get_number(j, "cv_rmse");
  d.learner = gbdt_from_json(at(j, "learner"));
  if (d.learner.feature_count != d.layout.width())
    fail(ErrorCode::ParseError, "learner width does not match the feature layout");
  return d;
}

// --- Verdicts and configs ------------------------------------------------

inline json to_json(const DriftVerdict& v) {
  return {{"chi2", v.chi2}, {"df", v.df}, {"p_value", v.p_value}, {"alpha", v.alpha}, {"drift", v.drift},
          {"warnings", v.warnings}};
}

inline json to_json(const GbdtParams& g) {
  return {{"n_trees", g.n_trees},
          {"max_depth", g.max_depth},
          {"learning_rate", g.learning_rate},
          {"min_samples_leaf", g.min_samples_leaf},
          {"feature_subsample", g.feature_subsample}};
}

inline json to_json(const PipelineConfig& c) {
  return {{"config_id", std::string(to_string(c.config_id))},
          {"K", c.K},
          {"Q", c.Q},
          {"alpha", c.alpha},
          {"imputer", std::string(to_string(c.imputer))},
          {"gbdt", to_json(c.gbdt)},
          {"n_split", c.n_split},
          {"max_pairs", c.max_pairs},
          {"seed", c.seed}};
}

namespace json_detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  if (!j.is_object()) fail(ErrorCode::ParseError, std::string(where) + " must be a JSON object");
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail(ErrorCode::ParseError, std::string("unknown ") + where + " field '" + k + "'");
}

}  // namespace json_detail

inline GbdtParams gbdt_params_from_json(const json& j) {
  using namespace json_detail;
  reject_unknown(j, {"n_trees", "max_depth", "learning_rate", "min_samples_leaf", "feature_subsample"}, "gbdt");
  GbdtParams g;
  if (j.contains("n_trees")) g.n_trees = get<int>(j, "n_trees");
  if (j.contains("max_depth")) g.max_depth = get<int>(j, "max_depth");
  if (j.contains("learning_rate")) g.learning_rate = get_number(j, "learning_rate");
  if (j.contains("min_samples_leaf")) g.min_samples_leaf = get<int>(j, "min_samples_leaf");
  if (j.contains("feature_subsample")) g.feature_subsample = get_number(j, "feature_subsample");
  return g;
}

/// Fields not present keep their defaults; unknown fields are rejected.
inline PipelineConfig pipeline_config_from_json(const json& j) {
  using namespace json_detail;
  reject_unknown(j, {"config_id", "K", "Q", "alpha", "imputer", "gbdt", "n_split", "max_pairs", "seed"},
                 "config");
  PipelineConfig c;
  c.config_id = parse_config_id(get<std::string>(j, "config_id"));
  if (j.contains("K")) c.K = get<std::size_t>(j, "K");
  if (j.contains("Q")) c.Q = get<std::size_t>(j, "Q");
  if (j.contains("alpha")) c.alpha = get_number(j, "alpha");
  if (j.contains("imputer")) c.imputer = parse_impute_kind(get<std::string>(j, "imputer"));
  if (j.contains("gbdt")) c.gbdt = gbdt_params_from_json(j.at("gbdt"));
  if (j.contains("n_split")) c.n_split = get<int>(j, "n_split");
  if (j.contains("max_pairs")) c.max_pairs = get<std::size_t>(j, "max_pairs");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
  c.validate();
  return c;
}

// --- Synthetic specs -----------------------------------------------------

inline json to_json(const DistributionSpec& s) {
  return {{"family", std::string(to_string(s.family))},
          {"location", s.location},
          {"scale", s.scale},
          {"latent_weight", s.latent_weight}};
}

inline DistributionSpec distribution_spec_from_json(const json& j) {
  using namespace json_detail;
  DistributionSpec s;
  s.family = parse_family(get<std::string>(j, "family"));
  s.location = get<std::vector<double>>(j, "location");
  s.scale = get<std::vector<double>>(j, "scale");
  if (j.contains("latent_weight")) s.latent_weight = get_number(j, "latent_weight");
  return s;
}

inline json to_json(const DriftSpec& d) {
  return {{"kind", std::string(to_string(d.kind))}, {"severity", d.severity}};
}

// --- Experiment results --------------------------------------------------

inline json to_json(const DriftCurve& c) {
  json levels = json::array();
  for (std::size_t i = 0; i < c.levels.size(); ++i)
    levels.push_back({{"level", c.levels[i]},
                      {"trials", c.trials[i]},
                      {"detections", c.detections[i]},
                      {"ratio", c.ratios[i]},
                      {"ci_low", c.intervals[i].low},
                      {"ci_high", c.intervals[i].high}});
  return {{"config", c.config},
          {"config_id", std::string(to_string(c.config_id))},
          {"drift", std::string(to_string(c.drift))},
          {"family", std::string(to_string(c.family))},
          {"seed", c.seed},
          {"m", c.m},
          {"levels", std::move(levels)}};
}

inline DriftCurve drift_curve_from_json(const json& j) {
  using namespace json_detail;
  DriftCurve c;
  c.config = get<std::string>(j, "config");
  c.config_id = parse_config_id(get<std::string>(j, "config_id"));
  c.drift = parse_drift_kind(get<std::string>(j, "drift"));
  c.family = parse_family(get<std::string>(j, "family"));
  c.seed = get<std::uint64_t>(j, "seed");
  c.m = get<std::size_t>(j, "m");
  const auto& levels = at(j, "levels");
  if (!levels.is_array()) fail(ErrorCode::ParseError, "levels must be an array");
  for (const auto& l : levels) {
    c.levels.push_back(get<int>(l, "level"));
    c.trials.push_back(get<std::size_t>(l, "trials"));
    c.detections.push_back(get<std::size_t>(l, "detections"));
    c.ratios.push_back(get_number(l, "ratio"));
    c.intervals.push_back({get_number(l, "ci_low"), get_number(l, "ci_high")});
  }
  return c;
}

inline json to_json(const AblationResult& r, const AblationOptions& opt) {
  json curves = json::array();
  for (const auto& c : r.curves) curves.push_back(to_json(c));
  json corr = json::array();
  for (const auto& c : r.correlations) {
    json e = {{"config", c.config}, {"drift", std::string(to_string(c.drift))}};
    e["pearson_vs_complete"] = c.pearson ? json(*c.pearson) : json(nullptr);
    if (!c.note.empty()) e["note"] = c.note;
    corr.push_back(std::move(e));
  }
  json failures = json::array();
  for (const auto& f : r.failures)
    failures.push_back({{"drift", std::string(to_string(f.drift))},
                        {"level", f.level},
                        {"trial", f.trial},
                        {"config", f.config},
                        {"message", f.message}});
  json configs = json::array();
  for (const auto& c : opt.configs) configs.push_back(to_json(c));
  return {{"kind", "ablation"},
          {"master_seed", opt.master_seed},
          {"trials", opt.trials},
          {"m", opt.m},
          {"mcar_rate", opt.mcar_rate},
          {"rng", std::string(RandomSource::kAlgorithm)},
          {"configs", std::move(configs)},
          {"curves", std::move(curves)},
          {"correlations", std::move(corr)},
          {"failures", std::move(failures)}};
}

inline json to_json(const DistanceBenchmarkResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"family", std::string(to_string(c.family))},
                     {"method", c.method},
                     {"mae_mean", c.mae_mean},
                     {"mae_std", c.mae_std},
                     {"rmse_mean", c.rmse_mean},
                     {"rmse_std", c.rmse_std},
                     {"mae", c.mae},
                     {"rmse", c.rmse},
                     {"failures", c.failures}});
  return {{"kind", "distbench"},
          {"master_seed", r.seed},
          {"trials", r.trials},
          {"rows", r.rows},
          {"rng", std::string(RandomSource::kAlgorithm)},
          {"cells", std::move(cells)}};
}

inline DistanceBenchmarkResult distance_benchmark_from_json(const json& j) {
  using namespace json_detail;
  DistanceBenchmarkResult r;
  r.seed = get<std::uint64_t>(j, "master_seed");
  r.trials = get<std::size_t>(j, "trials");
  r.rows = get<std::size_t>(j, "rows");
  for (const auto& c : at(j, "cells")) {
    DistanceCell cell;
    cell.family = parse_family(get<std::string>(c, "family"));
    cell.method = get<std::string>(c, "method");
    cell.mae_mean = get_number(c, "mae_mean");
    cell.mae_std = get_number(c, "mae_std");
    cell.rmse_mean = get_number(c, "rmse_mean");
    cell.rmse_std = get_number(c, "rmse_std");
    if (c.contains("mae")) cell.mae = get<std::vector<double>>(c, "mae");
    if (c.contains("rmse")) cell.rmse = get<std::vector<double>>(c, "rmse");
    if (c.contains("failures")) cell.failures = get<std::vector<std::string>>(c, "failures");
    r.cells.push_back(std::move(cell));
  }
  return r;
}

// --- Files ---------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::IoError, "failed writing '" + path + "'");
}

}  // namespace driftfuzz
