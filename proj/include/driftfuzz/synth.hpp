#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "driftfuzz/core.hpp"
#include "driftfuzz/error.hpp"
#include "driftfuzz/observation_set.hpp"
#include "driftfuzz/random.hpp"

namespace driftfuzz {

enum class Family { Uniform, Gaussian, Exponential, Poisson, Categorical };

inline constexpr Family kAllFamilies[] = {Family::Uniform, Family::Gaussian, Family::Exponential, Family::Poisson,
                                          Family::Categorical};

constexpr std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::Uniform: return "uniform";
    case Family::Gaussian: return "gaussian";
    case Family::Exponential: return "exponential";
    case Family::Poisson: return "poisson";
    case Family::Categorical: return "categorical";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  for (auto f : kAllFamilies)
    if (to_string(f) == s) return f;
  fail(ErrorCode::InvalidArgument, "unknown distribution family '" + std::string(s) + "'");
}

/// Per-dimension parameters of a synthetic distribution. Meaning by family:
///   uniform      x ~ U(location, location + scale)
///   gaussian     x ~ N(location, scale)
///   exponential  x ~ Exp with mean `scale`
///   poisson      x ~ Poisson(scale); with latent_weight w > 0 a shared count
///                L ~ Poisson(w * min scale) is added to every dimension and
///                each own component shrinks by the same mean, so marginals
///                stay put while dimensions become correlated
///   categorical  x uniform on the integers {0, ..., scale - 1}
struct DistributionSpec {
  Family family = Family::Gaussian;
  std::vector<double> location;
  std::vector<double> scale;
  double latent_weight = 0.0;

  std::size_t dims() const noexcept { return scale.size(); }
  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;
};

/// Synthetic generator settings of the distance-estimation benchmark: ten
/// dimensions for uniform, gaussian and exponential, five for poisson and
/// categorical. Random parameters are drawn once from `params_rng`.
inline DistributionSpec table1_spec(Family family, RandomSource params_rng) {
  auto engine = params_rng.engine();
  DistributionSpec s;
  s.family = family;
  const std::size_t n = (family == Family::Poisson || family == Family::Categorical) ? 5 : 10;
  s.location.assign(n, 0.0);
  s.scale.assign(n, 0.0);
  auto open_unit = [&] {
    double u;
    do u = engine.uniform();
    while (u == 0.0);
    return u;
  };
  for (std::size_t d = 0; d < n; ++d) {
    switch (family) {
      case Family::Uniform: s.scale[d] = 10.0; break;
      case Family::Gaussian:
        s.location[d] = engine.uniform();
        s.scale[d] = open_unit();
        break;
      case Family::Exponential: s.scale[d] = open_unit(); break;
      case Family::Poisson: s.scale[d] = 5.0 + std::floor(engine.uniform() * 6.0); break;
      case Family::Categorical: s.scale[d] = 10.0; break;
    }
  }
  return s;
}

/// MCAR rates of the benchmark: `rate` on the first five of ten dimensions,
/// or on the first three of five.
inline MissingRateVector table1_rates(Family family, double rate = 0.2) {
  const bool small = family == Family::Poisson || family == Family::Categorical;
  const std::size_t n = small ? 5 : 10;
  const std::size_t hit = small ? 3 : 5;
  MissingRateVector r;
  r.rates.assign(n, 0.0);
  std::fill_n(r.rates.begin(), hit, rate);
  return r;
}

/// 0.2 on the first half (rounded down) of the columns.
inline MissingRateVector half_mcar_rates(std::size_t dims, double rate = 0.2) {
  MissingRateVector r;
  r.rates.assign(dims, 0.0);
  std::fill_n(r.rates.begin(), dims / 2, rate);
  return r;
}

inline ObservationSet generate(const DistributionSpec& spec, std::size_t m, RandomSource rng) {
  if (m < 1) fail(ErrorCode::InvalidArgument, "generate needs m >= 1");
  const std::size_t n = spec.dims();
  if (n == 0 || spec.location.size() != n)
    fail(ErrorCode::InvalidArgument, "distribution spec has inconsistent dimensions");
  auto engine = rng.engine();
  std::vector<double> values(m * n);

  double lambda_min = 0.0;
  if (spec.family == Family::Poisson) lambda_min = *std::min_element(spec.scale.begin(), spec.scale.end());
  const double latent_mean = spec.latent_weight * lambda_min;

  for (std::size_t i = 0; i < m; ++i) {
    double latent = 0.0;
    if (spec.family == Family::Poisson && latent_mean > 0.0)
      latent = static_cast<double>(std::poisson_distribution<long>(latent_mean)(engine));
    for (std::size_t d = 0; d < n; ++d) {
      double v = 0.0;
      switch (spec.family) {
        case Family::Uniform: v = spec.location[d] + spec.scale[d] * engine.uniform(); break;
        case Family::Gaussian: v = std::normal_distribution<double>(spec.location[d], spec.scale[d])(engine); break;
        case Family::Exponential: v = std::exponential_distribution<double>(1.0 / spec.scale[d])(engine); break;
        case Family::Poisson: {
          const double own = spec.scale[d] - latent_mean;
          v = latent + (own > 0.0 ? static_cast<double>(std::poisson_distribution<long>(own)(engine)) : 0.0);
          break;
        }
        case Family::Categorical:
          v = std::min(spec.scale[d] - 1.0, std::floor(engine.uniform() * spec.scale[d]));
          break;
      }
      values[i * n + d] = v;
    }
  }
  return ObservationSet(m, n, std::move(values), {});
}

enum class DriftKind { UniformMean, GaussianMean, GaussianCov, PoissonMean, PoissonRho };

inline constexpr DriftKind kAllDriftKinds[] = {DriftKind::UniformMean, DriftKind::GaussianMean, DriftKind::GaussianCov,
                                               DriftKind::PoissonMean, DriftKind::PoissonRho};

constexpr std::string_view to_string(DriftKind k) noexcept {
  switch (k) {
    case DriftKind::UniformMean: return "uniform_mean";
    case DriftKind::GaussianMean: return "gaussian_mean";
    case DriftKind::GaussianCov: return "gaussian_cov";
    case DriftKind::PoissonMean: return "poisson_mean";
    case DriftKind::PoissonRho: return "poisson_rho";
  }
  return "?";
}

inline DriftKind parse_drift_kind(std::string_view s) {
  for (auto k : kAllDriftKinds)
    if (to_string(k) == s) return k;
  fail(ErrorCode::InvalidArgument, "unknown drift kind '" + std::string(s) + "'");
}

constexpr Family base_family(DriftKind k) noexcept {
  switch (k) {
    case DriftKind::UniformMean: return Family::Uniform;
    case DriftKind::GaussianMean:
    case DriftKind::GaussianCov: return Family::Gaussian;
    case DriftKind::PoissonMean:
    case DriftKind::PoissonRho: return Family::Poisson;
  }
  return Family::Gaussian;
}

struct DriftSpec {
  DriftKind kind = DriftKind::GaussianMean;
  int severity = 0;
};

inline constexpr int kMaxSeverity = 10;

/// Severity-s version of `spec`:
///   uniform_mean   range shifted by 0.05 s
///   gaussian_mean  mean shifted by 0.05 s sigma
///   gaussian_cov   sigma scaled by 1 + 0.05 s
///   poisson_mean   lambda scaled by 1 + 0.02 s
///   poisson_rho    shared latent component with weight s / 10
inline DistributionSpec apply_drift(const DistributionSpec& spec, const DriftSpec& drift) {
  if (drift.severity < 0 || drift.severity > kMaxSeverity)
    fail(ErrorCode::InvalidArgument, "severity must lie in [0, 10]");
  if (base_family(drift.kind) != spec.family)
    fail(ErrorCode::IncompatibleDrift, std::string(to_string(drift.kind)) + " does not apply to a " +
                                           std::string(to_string(spec.family)) + " distribution");
  DistributionSpec out = spec;
  const double s = drift.severity;
  for (std::size_t d = 0; d < out.dims(); ++d) {
    switch (drift.kind) {
      case DriftKind::UniformMean: out.location[d] += 0.05 * s; break;
      case DriftKind::GaussianMean: out.location[d] += 0.05 * s * spec.scale[d]; break;
      case DriftKind::GaussianCov: out.scale[d] *= 1.0 + 0.05 * s; break;
      case DriftKind::PoissonMean: out.scale[d] *= 1.0 + 0.02 * s; break;
      case DriftKind::PoissonRho: break;
    }
  }
  if (drift.kind == DriftKind::PoissonRho) out.latent_weight = s / 10.0;
  return out;
}

/// MCAR injection for experiments; same masking as mask_values.
inline ObservationSet inject_mcar(const ObservationSet& data, const MissingRateVector& rates, RandomSource rng) {
  if (!data.complete()) fail(ErrorCode::InvalidArgument, "inject_mcar expects complete data");
  return mask_values(data, rates, rng);
}

}  // namespace driftfuzz
