#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "twomed/dataset.hpp"
#include "twomed/types.hpp"

namespace twomed {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct BootstrapResult {
  ComponentSet point;
  std::vector<Interval> components;  // aligned with point.names()
  std::array<Interval, 4> aggregates{};  // PDE, TDE, SIE_M1, TE
  double level = 0.95;
  std::size_t replicates = 0;
  std::size_t failed_replicates = 0;
  std::uint64_t seed = 0;

  Interval interval_of(ComponentName c) const;
  Interval interval_of(AggregateName a) const;
};

using Estimator = std::function<ComponentSet(const Dataset&)>;

/// Linear interpolation between order statistics (Hyndman-Fan type 7):
/// h = (n - 1) p, result = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
/// `sorted` must be ascending and non-empty.
double quantile_sorted(const std::vector<double>& sorted, double p);

/// Case-resampling percentile bootstrap. Replicate r resamples n rows with an
/// RNG seeded from (seed, r) only, so results do not depend on threads.
/// Replicates whose estimator throws EstimationError are dropped and counted;
/// more than 5% dropped is an EstimationError. Needs B >= 100, 0 < level < 1.
BootstrapResult bootstrap(const Dataset& d, const Estimator& estimator, std::size_t B,
                          double level, std::uint64_t seed, unsigned threads = 0);

/// bootstrap() with the linear-model estimator: refit the three models on each
/// resample and apply the closed-form decomposition at the fixed cfg.
BootstrapResult bootstrap_decomposition(const Dataset& d, const ReferenceConfig& cfg,
                                        std::size_t B, double level, std::uint64_t seed,
                                        unsigned threads = 0);

/// Full-data closed-form estimate (the bootstrap point estimate).
ComponentSet linear_model_estimate(const Dataset& d, const ReferenceConfig& cfg);

}  // namespace twomed
