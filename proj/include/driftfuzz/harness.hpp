#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "driftfuzz/cluster.hpp"
#include "driftfuzz/core.hpp"
#include "driftfuzz/error.hpp"
#include "driftfuzz/fwf.hpp"
#include "driftfuzz/impute.hpp"
#include "driftfuzz/mdl.hpp"
#include "driftfuzz/observation_set.hpp"
#include "driftfuzz/random.hpp"
#include "driftfuzz/stats.hpp"
#include "driftfuzz/synth.hpp"

namespace driftfuzz {

enum class ConfigId { Complete, MvImpute, MdlCrisp, MdlFwfGau, MdlFwfTri, MdlFwfGauTopq, MdlFwfTriTopq };

inline constexpr ConfigId kAllConfigIds[] = {ConfigId::Complete,      ConfigId::MvImpute,     ConfigId::MdlCrisp,
                                             ConfigId::MdlFwfGau,     ConfigId::MdlFwfTri,    ConfigId::MdlFwfGauTopq,
                                             ConfigId::MdlFwfTriTopq};

constexpr std::string_view to_string(ConfigId c) noexcept {
  switch (c) {
    case ConfigId::Complete: return "complete";
    case ConfigId::MvImpute: return "mv_impute";
    case ConfigId::MdlCrisp: return "mdl_crisp";
    case ConfigId::MdlFwfGau: return "mdl_fwf_gau";
    case ConfigId::MdlFwfTri: return "mdl_fwf_tri";
    case ConfigId::MdlFwfGauTopq: return "mdl_fwf_gau_topq";
    case ConfigId::MdlFwfTriTopq: return "mdl_fwf_tri_topq";
  }
  return "?";
}

inline ConfigId parse_config_id(std::string_view s) {
  for (auto c : kAllConfigIds)
    if (to_string(c) == s) return c;
  fail(ErrorCode::InvalidArgument, "unknown config_id '" + std::string(s) + "'");
}

constexpr bool uses_mdl(ConfigId c) noexcept {
  return c != ConfigId::Complete && c != ConfigId::MvImpute;
}

constexpr bool uses_topq(ConfigId c) noexcept {
  return c == ConfigId::MdlFwfGauTopq || c == ConfigId::MdlFwfTriTopq;
}

/// One detector pipeline. K = 0 picks max(2, m / 50) from the reference
/// size; Q is read only by the topq variants, the other fuzzy variants
/// normalize over all K clusters.
struct PipelineConfig {
  ConfigId config_id = ConfigId::MdlFwfGauTopq;
  std::size_t K = 0;
  std::size_t Q = 3;
  double alpha = 0.05;
  ImputeKind imputer = ImputeKind::Iterative;
  GbdtParams gbdt;
  int n_split = 5;
  std::size_t max_pairs = 20000;
  std::uint64_t seed = 0;

  void validate() const {
    if (K == 1) fail(ErrorCode::KTooSmall, "K must be at least 2 (or 0 for automatic)");
    if (Q < 1) fail(ErrorCode::InvalidArgument, "Q must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    if (n_split < 2) fail(ErrorCode::InvalidArgument, "n_split must be at least 2");
    if (max_pairs < 1) fail(ErrorCode::InvalidArgument, "max_pairs must be positive");
    gbdt.validate();
  }

  MdlOptions mdl_options() const { return {n_split, max_pairs, gbdt}; }
};

inline PipelineConfig make_config(ConfigId id, std::uint64_t seed = 0) {
  PipelineConfig c;
  c.config_id = id;
  c.seed = seed;
  return c;
}

/// Membership and Q of a fuzzy config over K clusters; empty for the
/// crisp pipelines.
inline std::optional<FwfConfig> fwf_config(const PipelineConfig& cfg, std::size_t k) {
  switch (cfg.config_id) {
    case ConfigId::MdlFwfGau: return FwfConfig{Membership::Gaussian, k};
    case ConfigId::MdlFwfTri: return FwfConfig{Membership::Triangular, k};
    case ConfigId::MdlFwfGauTopq: return FwfConfig{Membership::Gaussian, cfg.Q};
    case ConfigId::MdlFwfTriTopq: return FwfConfig{Membership::Triangular, cfg.Q};
    default: return std::nullopt;
  }
}

/// Everything a pipeline learns from the reference window.
struct ReferenceFit {
  Partition partition;
  std::optional<DistanceModel> model;
};

inline std::size_t resolve_k(const PipelineConfig& cfg, std::size_t reference_rows) {
  return cfg.K == 0 ? default_bin_count(reference_rows) : cfg.K;
}

/// Partition from the complete reference rows.
inline Partition fit_partition(const ObservationSet& reference, std::size_t k, RandomSource rng) {
  if (reference.complete()) return kmeans_fit(reference, k, rng);
  return kmeans_fit(split_complete_missing(reference).complete, k, rng);
}

namespace harness_detail {

inline void require_complete(const ObservationSet& w, std::string_view which) {
  if (!w.complete())
    fail(ErrorCode::InvalidArgument,
         "windows must not have missing values; " + std::string(which) + " has " +
             std::to_string(w.missing_count()) + " missing cells");
}

template <class F>
decltype(auto) with_context(const PipelineConfig& cfg, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), "config " + std::string(to_string(cfg.config_id)) + ": " + e.detail());
  }
}

}  // namespace harness_detail

/// Fits the reference side of a pipeline. A supplied partition or model is
/// used as is instead of being trained.
inline ReferenceFit fit_reference(const ObservationSet& reference, const PipelineConfig& cfg,
                                  const Partition* partition = nullptr, const DistanceModel* model = nullptr) {
  return harness_detail::with_context(cfg, [&] {
    cfg.validate();
    if (cfg.config_id == ConfigId::Complete) harness_detail::require_complete(reference, "reference");
    const RandomSource rng(cfg.seed);
    ReferenceFit fit;
    if (partition) {
      if (partition->dims != reference.cols())
        fail(ErrorCode::LengthMismatch, "partition width does not match the reference window");
      fit.partition = *partition;
    } else {
      fit.partition = fit_partition(reference, resolve_k(cfg, reference.rows()), rng.derive(1));
    }
    if (uses_mdl(cfg.config_id)) {
      if (model)
        fit.model = *model;
      else
        fit.model = train_masked_distance(reference, default_pool(), cfg.mdl_options(), rng.derive(2));
    }
    return fit;
  });
}

/// Bin frequencies of one window under a fitted pipeline. `estimates`, when
/// given, must come from estimate_window on this window and fit.
inline FrequencyVector window_frequency(const ObservationSet& window, const ReferenceFit& fit,
                                        const PipelineConfig& cfg, const WindowEstimates* estimates = nullptr) {
  return harness_detail::with_context(cfg, [&]() -> FrequencyVector {
    switch (cfg.config_id) {
      case ConfigId::Complete:
        harness_detail::require_complete(window, "window");
        return histogram(window, fit.partition);
      case ConfigId::MvImpute:
        if (window.complete()) return histogram(window, fit.partition);
        return histogram(impute(window, ImputeMethod{cfg.imputer}), fit.partition);
      default: break;
    }
    if (!fit.model) fail(ErrorCode::InvalidArgument, "pipeline needs a distance model");
    std::optional<WindowEstimates> local;
    if (!estimates) local = estimate_window(window, fit.partition, *fit.model);
    const WindowEstimates& est = estimates ? *estimates : *local;
    if (cfg.config_id == ConfigId::MdlCrisp) return crisp_frequency(est);
    return fuzzy_frequency(est, *fwf_config(cfg, fit.partition.k));
  });
}

/// End-to-end two-window drift test. Neither window is modified.
inline DriftVerdict detect(const ObservationSet& reference, const ObservationSet& test, const PipelineConfig& cfg,
                           const Partition* partition = nullptr, const DistanceModel* model = nullptr) {
  if (reference.cols() != test.cols())
    fail(ErrorCode::LengthMismatch, "reference and test windows differ in width");
  const auto fit = fit_reference(reference, cfg, partition, model);
  const auto ref_freq = window_frequency(reference, fit, cfg);
  const auto test_freq = window_frequency(test, fit, cfg);
  return harness_detail::with_context(cfg, [&] { return drift_test(ref_freq, test_freq, cfg.alpha); });
}

// ---------------------------------------------------------------------------
// Work queue

/// Worker count: hardware concurrency, capped by DRIFTFUZZ_THREADS when set
/// and by the number of work items.
inline std::size_t worker_count(std::size_t items) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DRIFTFUZZ_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(1, std::min(n, items));
}

/// Runs body(i) for i in [0, count) on a pool of workers. Bodies write into
/// slots they own, so results merge deterministically by index. The first
/// exception escaping a body is rethrown after all workers join.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                         std::size_t workers = 0) {
  if (count == 0) return;
  if (workers == 0) workers = worker_count(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::atomic<bool> failed{false};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count && !failed; i = next++) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
        failed = true;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Ablation

struct DriftCurve {
  std::string config;
  ConfigId config_id = ConfigId::Complete;
  DriftKind drift = DriftKind::GaussianMean;
  Family family = Family::Gaussian;
  std::vector<int> levels;
  std::vector<std::size_t> trials;      // successful trials per level
  std::vector<std::size_t> detections;  // drift verdicts per level
  std::vector<double> ratios;
  std::vector<Interval> intervals;      // Wilson 95%
  std::uint64_t seed = 0;
  std::size_t m = 0;
};

struct TrialFailure {
  DriftKind drift = DriftKind::GaussianMean;
  int level = 0;
  std::size_t trial = 0;
  std::string config;
  std::string message;
};

/// Pearson correlation of a config's curve with the `complete` curve of the
/// same drift kind; empty with a reason when undefined.
struct BaselineCorrelation {
  std::string config;
  DriftKind drift = DriftKind::GaussianMean;
  std::optional<double> pearson;
  std::string note;
};

struct AblationOptions {
  std::vector<int> levels{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t trials = 100;
  std::vector<DriftKind> drifts{DriftKind::GaussianMean};
  std::vector<PipelineConfig> configs;
  std::uint64_t master_seed = 0;
  std::size_t m = 1000;
  double mcar_rate = 0.2;
  std::size_t workers = 0;
};

struct AblationResult {
  std::vector<DriftCurve> curves;
  std::vector<BaselineCorrelation> correlations;
  std::vector<TrialFailure> failures;
};

/// Windows of one ablation cell. Every config of the cell reads these.
struct TrialWindows {
  ObservationSet reference_full;
  ObservationSet reference;  // with MCAR cells
  ObservationSet test_full;
  ObservationSet test;
};

/// Label of each config in results: its config_id, suffixed with the
/// position when the id repeats in the list.
inline std::vector<std::string> config_labels(const std::vector<PipelineConfig>& configs) {
  std::map<ConfigId, int> count;
  for (const auto& c : configs) ++count[c.config_id];
  std::vector<std::string> out;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::string s(to_string(configs[i].config_id));
    if (count[configs[i].config_id] > 1) s += "#" + std::to_string(i);
    out.push_back(std::move(s));
  }
  return out;
}

/// Base distribution of a drift kind for a sweep: its family's benchmark
/// parameters, drawn from the master seed.
inline DistributionSpec ablation_base_spec(DriftKind kind, std::uint64_t master_seed) {
  return table1_spec(base_family(kind), RandomSource(master_seed).derive({0x5eedULL, static_cast<std::uint64_t>(kind)}));
}

/// Reference windows depend on (drift kind, trial) only, test windows on
/// (drift kind, level, trial); the reference is shared by all levels.
inline TrialWindows ablation_windows(const DistributionSpec& base, DriftKind kind, int level, std::size_t trial,
                                     std::size_t m, double mcar_rate, std::uint64_t master_seed) {
  const RandomSource master(master_seed);
  const auto k = static_cast<std::uint64_t>(kind);
  const auto ref_rng = master.derive({1, k, trial});
  const auto test_rng = master.derive({2, k, static_cast<std::uint64_t>(level), trial});
  const auto rates = half_mcar_rates(base.dims(), mcar_rate);
  auto ref_full = generate(base, m, ref_rng.derive(1));
  auto ref = inject_mcar(ref_full, rates, ref_rng.derive(2));
  auto test_full = generate(apply_drift(base, {kind, level}), m, test_rng.derive(1));
  auto test = inject_mcar(test_full, rates, test_rng.derive(2));
  return {std::move(ref_full), std::move(ref), std::move(test_full), std::move(test)};
}

namespace harness_detail {

struct CellOutcome {
  bool ok = false;
  bool drift = false;
  std::string error;
};

/// Fits shared within one (drift kind, trial): the complete-data partition,
/// the masked-data partition, and one distance model per distinct set of
/// learner settings.
class TrialFits {
 public:
  TrialFits(const TrialWindows& w, RandomSource rng) : w_(w), rng_(rng) {}

  const ReferenceFit& get(const PipelineConfig& cfg) {
    for (auto& e : entries_)
      if (matches(e.cfg, cfg)) return e.fit;
    ReferenceFit fit;
    const bool full = cfg.config_id == ConfigId::Complete;
    const auto& ref = full ? w_.reference_full : w_.reference;
    const std::size_t k = resolve_k(cfg, ref.rows());
    fit.partition = partition_for(full, k);
    if (uses_mdl(cfg.config_id)) fit.model = model_for(cfg);
    entries_.push_back({cfg, std::move(fit)});
    return entries_.back().fit;
  }

  const WindowEstimates& estimates(const ObservationSet& window, const PipelineConfig& cfg, bool is_reference) {
    const ReferenceFit& fit = get(cfg);
    for (auto& e : estimates_)
      if (e.is_reference == is_reference && e.model == &*fit.model && e.partition == &fit.partition) return e.est;
    estimates_.push_back({is_reference, &*fit.model, &fit.partition,
                          estimate_window(window, fit.partition, *fit.model)});
    return estimates_.back().est;
  }

  void reset_test_estimates() {
    std::erase_if(estimates_, [](const EstimateEntry& e) { return !e.is_reference; });
  }

 private:
  static bool same_learner(const PipelineConfig& a, const PipelineConfig& b) {
    return a.gbdt == b.gbdt && a.n_split == b.n_split && a.max_pairs == b.max_pairs;
  }
  static bool matches(const PipelineConfig& a, const PipelineConfig& b) {
    const bool full_a = a.config_id == ConfigId::Complete, full_b = b.config_id == ConfigId::Complete;
    if (full_a != full_b || a.K != b.K) return false;
    if (uses_mdl(a.config_id) != uses_mdl(b.config_id)) return false;
    return !uses_mdl(a.config_id) || same_learner(a, b);
  }

  Partition partition_for(bool full, std::size_t k) {
    for (auto& p : partitions_)
      if (p.full == full && p.k == k) return p.partition;
    const auto& ref = full ? w_.reference_full : w_.reference;
    partitions_.push_back({full, k, fit_partition(ref, k, rng_.derive({3, full ? 1u : 0u, k}))});
    return partitions_.back().partition;
  }

  DistanceModel model_for(const PipelineConfig& cfg) {
    for (auto& m : models_)
      if (same_learner(m.cfg, cfg)) return m.model;
    auto model = train_masked_distance(w_.reference, default_pool(), cfg.mdl_options(), rng_.derive(4));
    models_.push_back({cfg, model});
    return model;
  }

  struct FitEntry {
    PipelineConfig cfg;
    ReferenceFit fit;
  };
  struct PartitionEntry {
    bool full;
    std::size_t k;
    Partition partition;
  };
  struct ModelEntry {
    PipelineConfig cfg;
    DistanceModel model;
  };
  struct EstimateEntry {
    bool is_reference;
    const DistanceModel* model;
    const Partition* partition;
    WindowEstimates est;
  };

  const TrialWindows& w_;
  RandomSource rng_;
  std::deque<FitEntry> entries_;
  std::vector<PartitionEntry> partitions_;
  std::vector<ModelEntry> models_;
  std::vector<EstimateEntry> estimates_;
};

inline CellOutcome run_cell(TrialFits& fits, const TrialWindows& w, const PipelineConfig& cfg) {
  CellOutcome out;
  try {
    const bool full = cfg.config_id == ConfigId::Complete;
    const ReferenceFit& fit = fits.get(cfg);
    const auto& ref = full ? w.reference_full : w.reference;
    const auto& test = full ? w.test_full : w.test;
    FrequencyVector fr, ft;
    if (uses_mdl(cfg.config_id)) {
      fr = window_frequency(ref, fit, cfg, &fits.estimates(ref, cfg, true));
      ft = window_frequency(test, fit, cfg, &fits.estimates(test, cfg, false));
    } else {
      fr = window_frequency(ref, fit, cfg);
      ft = window_frequency(test, fit, cfg);
    }
    out.drift = drift_test(fr, ft, cfg.alpha).drift;
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace harness_detail

/// Severity sweep. For every (drift kind, trial) a reference window is
/// drawn at severity 0 and, for every level, a test window at that level;
/// MCAR cells are injected into both and every config scores the same
/// windows. Failed cells are recorded and excluded from the ratios. All
/// randomness comes from master_seed; the configs' own seeds are unused.
inline AblationResult run_ablation(const AblationOptions& opt) {
  if (opt.trials < 1) fail(ErrorCode::InvalidArgument, "trials must be at least 1");
  if (opt.configs.empty()) fail(ErrorCode::EmptyInput, "no pipeline configs");
  if (opt.drifts.empty()) fail(ErrorCode::EmptyInput, "no drift kinds");
  if (opt.levels.empty()) fail(ErrorCode::EmptyInput, "no severity levels");
  for (const auto& c : opt.configs) c.validate();
  for (int l : opt.levels)
    if (l < 0 || l > kMaxSeverity) fail(ErrorCode::InvalidArgument, "severity levels must lie in [0, 10]");

  const std::size_t n_drift = opt.drifts.size(), n_level = opt.levels.size(), n_cfg = opt.configs.size();
  const auto labels = config_labels(opt.configs);
  std::vector<DistributionSpec> bases;
  for (auto d : opt.drifts) bases.push_back(ablation_base_spec(d, opt.master_seed));

  // outcome[((d * trials + t) * n_level + l) * n_cfg + c]
  std::vector<harness_detail::CellOutcome> outcome(n_drift * opt.trials * n_level * n_cfg);
  const auto idx = [&](std::size_t d, std::size_t t, std::size_t l, std::size_t c) {
    return ((d * opt.trials + t) * n_level + l) * n_cfg + c;
  };

  parallel_for(
      n_drift * opt.trials,
      [&](std::size_t unit) {
        const std::size_t d = unit / opt.trials, t = unit % opt.trials;
        std::optional<TrialWindows> first;
        std::optional<harness_detail::TrialFits> fits;
        for (std::size_t l = 0; l < n_level; ++l) {
          std::optional<TrialWindows> w;
          try {
            w = ablation_windows(bases[d], opt.drifts[d], opt.levels[l], t, opt.m, opt.mcar_rate, opt.master_seed);
          } catch (const std::exception& e) {
            for (std::size_t c = 0; c < n_cfg; ++c) outcome[idx(d, t, l, c)].error = e.what();
            continue;
          }
          if (!first) {
            first.emplace(*w);
            fits.emplace(*first, RandomSource(opt.master_seed).derive({3, static_cast<std::uint64_t>(opt.drifts[d]), t}));
          }
          fits->reset_test_estimates();
          for (std::size_t c = 0; c < n_cfg; ++c) outcome[idx(d, t, l, c)] = harness_detail::run_cell(*fits, *w, opt.configs[c]);
        }
      },
      opt.workers);

  AblationResult res;
  for (std::size_t d = 0; d < n_drift; ++d) {
    for (std::size_t c = 0; c < n_cfg; ++c) {
      DriftCurve curve;
      curve.config = labels[c];
      curve.config_id = opt.configs[c].config_id;
      curve.drift = opt.drifts[d];
      curve.family = base_family(opt.drifts[d]);
      curve.levels = opt.levels;
      curve.seed = opt.master_seed;
      curve.m = opt.m;
      for (std::size_t l = 0; l < n_level; ++l) {
        std::size_t ok = 0, hits = 0;
        for (std::size_t t = 0; t < opt.trials; ++t) {
          const auto& o = outcome[idx(d, t, l, c)];
          if (o.ok) {
            ++ok;
            hits += o.drift ? 1 : 0;
          } else {
            res.failures.push_back({opt.drifts[d], opt.levels[l], t, labels[c], o.error});
          }
        }
        curve.trials.push_back(ok);
        curve.detections.push_back(hits);
        curve.ratios.push_back(ok ? static_cast<double>(hits) / static_cast<double>(ok) : 0.0);
        curve.intervals.push_back(wilson_interval(hits, ok));
      }
      res.curves.push_back(std::move(curve));
    }
  }

  for (std::size_t d = 0; d < n_drift; ++d) {
    const DriftCurve* baseline = nullptr;
    for (const auto& cv : res.curves)
      if (cv.drift == opt.drifts[d] && cv.config_id == ConfigId::Complete) {
        baseline = &cv;
        break;
      }
    if (!baseline) continue;
    for (const auto& cv : res.curves) {
      if (cv.drift != opt.drifts[d] || &cv == baseline) continue;
      BaselineCorrelation bc{cv.config, cv.drift, std::nullopt, {}};
      try {
        bc.pearson = pearson_correlation(cv.ratios, baseline->ratios);
      } catch (const Error& e) {
        bc.note = e.what();
      }
      res.correlations.push_back(std::move(bc));
    }
  }
  return res;
}

/// The seven pipelines with default settings.
inline std::vector<PipelineConfig> all_configs(std::uint64_t seed = 0) {
  std::vector<PipelineConfig> out;
  for (auto id : kAllConfigIds) out.push_back(make_config(id, seed));
  return out;
}

// ---------------------------------------------------------------------------
// Distance benchmark

struct DistanceBenchmarkOptions {
  std::vector<Family> families{std::begin(kAllFamilies), std::end(kAllFamilies)};
  std::size_t trials = 5;
  std::uint64_t master_seed = 0;
  std::size_t rows = 500;
  double mcar_rate = 0.2;
  ImputerPool pool = default_pool();
  MdlOptions mdl;
  std::size_t workers = 0;
};

/// Error summary of one method on one family. Per-trial values are kept in
/// trial order; failed trials are listed with their reason instead.
struct DistanceCell {
  Family family = Family::Gaussian;
  std::string method;
  std::vector<double> mae;
  std::vector<double> rmse;
  double mae_mean = 0.0, mae_std = 0.0, rmse_mean = 0.0, rmse_std = 0.0;
  std::vector<std::string> failures;
};

struct DistanceBenchmarkResult {
  std::vector<DistanceCell> cells;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t rows = 0;

  const DistanceCell* find(Family f, std::string_view method) const {
    for (const auto& c : cells)
      if (c.family == f && c.method == method) return &c;
    return nullptr;
  }
};

namespace harness_detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

struct MethodError {
  bool ok = false;
  double mae = 0.0, rmse = 0.0;
  std::string error;
};

inline bool any_masked(std::span<const double> raw) {
  return std::any_of(raw.begin(), raw.end(), [](double v) { return std::isnan(v); });
}

}  // namespace harness_detail

/// Distance-estimation benchmark. Each trial draws `rows` observations,
/// masks them with the family's rate pattern, and measures each imputer's
/// error on every pairwise distance of the window along with MDL's
/// cross-validated error on its masked training pairs. Pairs without a
/// masked cell are exact for every method and count as zero error.
inline DistanceBenchmarkResult run_distance_benchmark(const DistanceBenchmarkOptions& opt) {
  if (opt.trials < 1) fail(ErrorCode::InvalidArgument, "trials must be at least 1");
  if (opt.families.empty()) fail(ErrorCode::EmptyInput, "no families");
  const std::size_t n_methods = opt.pool.size() + 1;
  const std::size_t n_fam = opt.families.size();
  std::vector<harness_detail::MethodError> errs(n_fam * opt.trials * n_methods);

  parallel_for(
      n_fam * opt.trials,
      [&](std::size_t unit) {
        const std::size_t f = unit / opt.trials, t = unit % opt.trials;
        const auto fam = opt.families[f];
        auto* out = &errs[unit * n_methods];
        const RandomSource rng = RandomSource(opt.master_seed).derive({7, static_cast<std::uint64_t>(fam), t});
        std::optional<ObservationSet> full, masked;
        try {
          full = generate(table1_spec(fam, rng.derive(1)), opt.rows, rng.derive(2));
          masked = inject_mcar(*full, table1_rates(fam, opt.mcar_rate), rng.derive(3));
        } catch (const std::exception& e) {
          for (std::size_t p = 0; p < n_methods; ++p) out[p].error = e.what();
          return;
        }
        const std::size_t m = full->rows();
        std::vector<double> truth;
        truth.reserve(m * (m - 1) / 2);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = i + 1; j < m; ++j) truth.push_back(euclidean_distance(full->row(i), full->row(j)));

        for (std::size_t p = 0; p < opt.pool.size(); ++p) {
          try {
            const auto imp = impute(*masked, opt.pool[p]);
            std::vector<double> est;
            est.reserve(truth.size());
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t j = i + 1; j < m; ++j) est.push_back(euclidean_distance(imp.row(i), imp.row(j)));
            out[p] = {true, mae(est, truth), rmse(est, truth), {}};
          } catch (const std::exception& e) {
            out[p].error = e.what();
          }
        }

        auto& mdl_out = out[opt.pool.size()];
        try {
          if (masked->complete()) {
            mdl_out = {true, 0.0, 0.0, {}};
          } else {
            MdlTrainingReport report;
            (void)train_masked_distance(*masked, opt.pool, opt.mdl, rng.derive(4), &report);
            std::vector<double> est(report.heldout_predictions);
            for (std::size_t r = 0; r < est.size(); ++r)
              if (!harness_detail::any_masked(report.pairs.row(r).raw))
                est[r] = report.pairs.targets[r];
            mdl_out = {true, mae(est, report.pairs.targets), rmse(est, report.pairs.targets), {}};
          }
        } catch (const std::exception& e) {
          mdl_out.error = e.what();
        }
      },
      opt.workers);

  DistanceBenchmarkResult res;
  res.trials = opt.trials;
  res.seed = opt.master_seed;
  res.rows = opt.rows;
  for (std::size_t f = 0; f < n_fam; ++f) {
    for (std::size_t p = 0; p < n_methods; ++p) {
      DistanceCell cell;
      cell.family = opt.families[f];
      cell.method = p < opt.pool.size() ? std::string(to_string(opt.pool[p].kind)) : "mdl";
      for (std::size_t t = 0; t < opt.trials; ++t) {
        const auto& e = errs[(f * opt.trials + t) * n_methods + p];
        if (e.ok) {
          cell.mae.push_back(e.mae);
          cell.rmse.push_back(e.rmse);
        } else {
          cell.failures.push_back("trial " + std::to_string(t) + ": " + e.error);
        }
      }
      std::tie(cell.mae_mean, cell.mae_std) = harness_detail::mean_std(cell.mae);
      std::tie(cell.rmse_mean, cell.rmse_std) = harness_detail::mean_std(cell.rmse);
      res.cells.push_back(std::move(cell));
    }
  }
  return res;
}

}  // namespace driftfuzz
