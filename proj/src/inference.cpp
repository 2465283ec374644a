#include "twomed/inference.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "twomed/closed_form.hpp"
#include "twomed/regression.hpp"

namespace twomed {

namespace {

std::size_t index_of(const ComponentSet& cs, ComponentName c) {
  const auto names = cs.names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == c) return i;
  throw StructuralError("component '" + std::string(to_string(c)) + "' is not part of the " +
                        std::string(to_string(cs.topology())) + " decomposition");
}

std::vector<std::size_t> resample_rows(std::size_t n, std::uint64_t seed, std::size_t replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(replicate) >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = pick(rng);
  return rows;
}

}  // namespace

Interval BootstrapResult::interval_of(ComponentName c) const {
  return components[index_of(point, c)];
}

Interval BootstrapResult::interval_of(AggregateName a) const {
  return aggregates[static_cast<std::size_t>(a)];
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

BootstrapResult bootstrap(const Dataset& d, const Estimator& estimator, std::size_t B,
                          double level, std::uint64_t seed, unsigned threads) {
  if (B < 100) throw DomainError("bootstrap needs at least 100 replicates, got " + std::to_string(B));
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  d.validate();
  if (d.n() == 0) throw DataError("dataset is empty");

  const ComponentSet point = estimator(d);
  const std::size_t m = point.size();

  std::vector<std::vector<double>> draws(B);  // empty means failed
  auto run = [&](std::size_t r) {
    try {
      const auto cs = estimator(d.subset(resample_rows(d.n(), seed, r)));
      std::vector<double> v(cs.values().begin(), cs.values().end());
      for (auto a : kAggregateNames) v.push_back(cs[a]);
      draws[r] = std::move(v);
    } catch (const EstimationError&) {
      draws[r].clear();
    }
  };

  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, B));
  if (workers <= 1) {
    for (std::size_t r = 0; r < B; ++r) run(r);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < B; r += workers) run(r);
      });
    for (auto& t : pool) t.join();
  }

  BootstrapResult res{point, {}, {}, level, B, 0, seed};
  for (const auto& v : draws) res.failed_replicates += v.empty();
  if (static_cast<double>(res.failed_replicates) > 0.05 * static_cast<double>(B))
    throw EstimationError(std::to_string(res.failed_replicates) + " of " + std::to_string(B) +
                          " bootstrap replicates failed (more than 5%); results are not reliable");

  const double lo_p = (1.0 - level) / 2.0, hi_p = (1.0 + level) / 2.0;
  std::vector<double> column;
  for (std::size_t j = 0; j < m + 4; ++j) {
    column.clear();
    for (const auto& v : draws)
      if (!v.empty()) column.push_back(v[j]);
    std::sort(column.begin(), column.end());
    const Interval iv{quantile_sorted(column, lo_p), quantile_sorted(column, hi_p)};
    if (j < m)
      res.components.push_back(iv);
    else
      res.aggregates[j - m] = iv;
  }
  return res;
}

ComponentSet linear_model_estimate(const Dataset& d, const ReferenceConfig& cfg) {
  return decompose_closed_form(fit_coefficients(d, cfg.topology), cfg);
}

BootstrapResult bootstrap_decomposition(const Dataset& d, const ReferenceConfig& cfg,
                                        std::size_t B, double level, std::uint64_t seed,
                                        unsigned threads) {
  return bootstrap(
      d, [&cfg](const Dataset& x) { return linear_model_estimate(x, cfg); }, B, level, seed,
      threads);
}

}  // namespace twomed
