#include "twomed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

namespace twomed {

namespace detail {

Aggregates aggregates_from_nested(const std::array<double, 8>& w) {
  Aggregates g;
  g.te = w[0] - w[7];
  g.pde = w[6] - w[7];
  g.tde = w[0] - w[3];
  g.sie_m1 = w[3] - w[4];
  return g;
}

ComponentSet sequential_from_nested(const NestedValues& v) {
  const auto& w = v.w;
  // Each contrast is written as differences of (a, a*) outcome pairs.
  const double ref = v.y_a_ref - v.y_s_ref;
  const double m1s_ref = v.y_a_m1s_ref - v.y_s_m1s_ref;
  SequentialTerms t;
  t.cde = ref;
  t.int_ref_am1 = m1s_ref - ref;
  t.int_ref_am2_plus_am1m2 = (w[6] - w[7]) - m1s_ref;
  t.natint_am1 = (w[1] - w[5]) - (w[6] - w[7]);
  t.natint_am2 = (w[2] - w[4]) - (w[6] - w[7]);
  t.natint_m1m2 = (w[3] - w[4]) - (w[5] - w[7]);
  t.natint_am1m2 = ((w[0] - w[3]) - (w[2] - w[4])) - ((w[1] - w[5]) - (w[6] - w[7]));
  t.pie_m1 = w[5] - w[7];
  t.pie_m2 = w[4] - w[7];
  return ComponentSet(t, aggregates_from_nested(w));
}

ComponentSet nonsequential_from_nested(const NestedValues& v) {
  const auto& w = v.w;
  const double ref = v.y_a_ref - v.y_s_ref;
  const double m1s_ref = v.y_a_m1s_ref - v.y_s_m1s_ref;
  const double ref_m2s = v.y_a_ref_m2s - v.y_s_ref_m2s;
  NonSequentialTerms t;
  t.cde = ref;
  t.int_ref_am1 = m1s_ref - ref;
  t.int_ref_am2 = ref_m2s - ref;
  t.int_ref_am1m2 = ((w[6] - w[7]) - ref_m2s) - (m1s_ref - ref);
  t.natint_am1 = (w[1] - w[5]) - (w[6] - w[7]);
  t.natint_am2 = (w[2] - w[4]) - (w[6] - w[7]);
  t.natint_m1m2 = (w[3] - w[4]) - (w[5] - w[7]);
  t.natint_am1m2 = ((w[0] - w[3]) - (w[2] - w[4])) - ((w[1] - w[5]) - (w[6] - w[7]));
  t.pie_m1 = w[5] - w[7];
  t.pie_m2 = w[4] - w[7];
  return ComponentSet(t, aggregates_from_nested(w));
}

}  // namespace detail

// ---------------------------------------------------------------------------

namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

int binary_level(double x, const char* what) {
  if (x == 0.0) return 0;
  if (x == 1.0) return 1;
  throw DomainError(std::string(what) + " must be 0 or 1 for a binary model, got " +
                    std::to_string(x));
}

}  // namespace

void BinaryScm::validate() const {
  for (double p : p_m1_given_a)
    if (!is_probability(p)) throw DomainError("Pr(M1=1|a) must lie in [0, 1]");
  for (const auto& row : p_m2_given_a_m1)
    for (double p : row)
      if (!is_probability(p)) throw DomainError("Pr(M2=1|a,m1) must lie in [0, 1]");
  for (const auto& plane : e_y)
    for (const auto& row : plane)
      for (double y : row)
        if (!std::isfinite(y)) throw DomainError("E[Y|a,m1,m2] must be finite");
  if (topology == Topology::NonSequential) {
    for (const auto& row : p_m2_given_a_m1)
      if (row[0] != row[1])
        throw DomainError("non-sequential model: Pr(M2=1|a,m1) must not depend on m1");
  }
}

ComponentSet enumerate_binary_components(const BinaryScm& scm, const ReferenceConfig& cfg) {
  scm.validate();
  cfg.validate();
  if (cfg.topology != scm.topology)
    throw DomainError("reference config topology differs from the model topology");
  const int a = binary_level(cfg.a, "a");
  const int s = binary_level(cfg.a_star, "a_star");
  const int r1 = binary_level(cfg.m1_star, "m1_star");
  const int r2 = binary_level(cfg.m2_star, "m2_star");

  auto pm1 = [&](int z, int m1) {
    return m1 == 1 ? scm.p_m1_given_a[z] : 1.0 - scm.p_m1_given_a[z];
  };
  auto pm2 = [&](int w, int m1, int m2) {
    const double p = scm.p_m2_given_a_m1[w][m1];
    return m2 == 1 ? p : 1.0 - p;
  };
  const auto& e = scm.e_y;

  // E[Y(x, M1(z), M2(w, M1(z)))]
  auto nested = [&](int x, int w, int z) {
    double sum = 0.0;
    for (int m1 = 0; m1 < 2; ++m1)
      for (int m2 = 0; m2 < 2; ++m2) sum += e[x][m1][m2] * pm1(z, m1) * pm2(w, m1, m2);
    return sum;
  };
  // E[Y(x, M1(z), m2*)]
  auto m2_fixed = [&](int x, int z) {
    return e[x][0][r2] * pm1(z, 0) + e[x][1][r2] * pm1(z, 1);
  };
  // E[Y(x, m1*, M2(w, m1*))]
  auto m1_fixed = [&](int x, int w) {
    return e[x][r1][0] * pm2(w, r1, 0) + e[x][r1][1] * pm2(w, r1, 1);
  };

  detail::NestedValues v;
  for (std::size_t k = 0; k < 8; ++k) {
    const auto slots = exposure_slots(kNestedCounterfactuals[k], cfg);
    v.w[k] = nested(static_cast<int>(slots.outcome), static_cast<int>(slots.mediator2),
                    static_cast<int>(slots.mediator1));
  }
  v.y_a_ref = e[a][r1][r2];
  v.y_s_ref = e[s][r1][r2];
  v.y_a_m1s_ref = m2_fixed(a, s);
  v.y_s_m1s_ref = m2_fixed(s, s);
  v.y_a_ref_m2s = m1_fixed(a, s);
  v.y_s_ref_m2s = m1_fixed(s, s);
  return scm.topology == Topology::Sequential ? detail::sequential_from_nested(v)
                                              : detail::nonsequential_from_nested(v);
}

IndividualPotentials binary_individual(const BinaryScm& scm, double u_m1, double u_m2) {
  IndividualPotentials p;
  p.m1_of = [p1 = scm.p_m1_given_a, u_m1](double a) {
    return u_m1 < p1[binary_level(a, "exposure")] ? 1.0 : 0.0;
  };
  p.m2_of = [p2 = scm.p_m2_given_a_m1, u_m2](double a, double m1) {
    return u_m2 < p2[binary_level(a, "exposure")][binary_level(m1, "m1")] ? 1.0 : 0.0;
  };
  p.y_of = [e = scm.e_y](double a, double m1, double m2) {
    return e[binary_level(a, "exposure")][binary_level(m1, "m1")][binary_level(m2, "m2")];
  };
  return p;
}

namespace {

std::vector<double> breakpoints(std::vector<double> cuts) {
  cuts.push_back(0.0);
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

}  // namespace

ComponentSet latent_enumeration_components(const BinaryScm& scm, const ReferenceConfig& cfg) {
  scm.validate();
  cfg.validate();
  if (cfg.topology != scm.topology)
    throw DomainError("reference config topology differs from the model topology");
  for (double x : {cfg.a, cfg.a_star, cfg.m1_star, cfg.m2_star}) binary_level(x, "level");

  const auto u1 = breakpoints({scm.p_m1_given_a[0], scm.p_m1_given_a[1]});
  const auto u2 = breakpoints({scm.p_m2_given_a_m1[0][0], scm.p_m2_given_a_m1[0][1],
                               scm.p_m2_given_a_m1[1][0], scm.p_m2_given_a_m1[1][1]});

  std::array<double, ComponentSet::kMaxComponents> sum{};
  Aggregates agg;
  std::size_t size = 0;
  for (std::size_t i = 0; i + 1 < u1.size(); ++i) {
    for (std::size_t j = 0; j + 1 < u2.size(); ++j) {
      const double weight = (u1[i + 1] - u1[i]) * (u2[j + 1] - u2[j]);
      const auto p = binary_individual(scm, 0.5 * (u1[i] + u1[i + 1]), 0.5 * (u2[j] + u2[j + 1]));
      const auto cs = individual_components(p, cfg);
      size = cs.size();
      for (std::size_t k = 0; k < size; ++k) sum[k] += weight * cs.values()[k];
      for (auto name : kAggregateNames) agg[name] += weight * cs[name];
    }
  }
  return ComponentSet::from_values(cfg.topology, std::span<const double>(sum.data(), size), agg);
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kShards = 64;

// Running mean via Neumaier-compensated sum, variance via Welford.
struct Moments {
  double sum = 0, comp = 0;
  double mean = 0, m2 = 0;
  std::size_t n = 0;

  void add(double x) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0) return;
    for (double x : {o.sum, o.comp}) {
      const double t = sum + x;
      comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
      sum = t;
    }
    const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
    const double d = o.mean - mean;
    const double total = na + nb;
    mean += d * nb / total;
    m2 += o.m2 + d * d * na * nb / total;
    n += o.n;
  }

  double average() const { return (sum + comp) / static_cast<double>(n); }
  double std_error() const {
    if (n < 2) return 0.0;
    const double var = m2 / static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
  }
};

constexpr std::size_t kSlots = ComponentSet::kMaxComponents + 4 + 8;

void run_shard(const LinearScm& scm, const ReferenceConfig& cfg, std::size_t count,
               std::uint64_t seed, std::size_t shard, std::array<Moments, kSlots>& out) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(shard)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> e1(0.0, scm.sigma_m1), e2(0.0, scm.sigma_m2),
      ey(0.0, scm.sigma_y);

  const auto& th = scm.theta;
  const auto& be = scm.beta;
  const auto& ga = scm.gamma;
  const double tc = dot(scm.theta_c, cfg.covariates);
  const double bc = dot(scm.beta_c, cfg.covariates);
  const double gc = dot(scm.gamma_c, cfg.covariates);
  const std::size_t ncomp = components_of(cfg.topology).size();

  for (std::size_t i = 0; i < count; ++i) {
    const double u1 = e1(rng), u2 = e2(rng), uy = ey(rng);
    auto p = make_potentials(
        [&](double a) { return ga[0] + ga[1] * a + gc + u1; },
        [&](double a, double m1) { return be[0] + be[1] * a + be[2] * m1 + be[3] * a * m1 + bc + u2; },
        [&](double a, double m1, double m2) {
          return th[0] + th[1] * a + th[2] * m1 + th[3] * m2 + th[4] * a * m1 + th[5] * a * m2 +
                 th[6] * m1 * m2 + th[7] * a * m1 * m2 + tc + uy;
        });
    const auto v = detail::nested_values(p, cfg);
    const auto cs = cfg.topology == Topology::Sequential ? detail::sequential_from_nested(v)
                                                         : detail::nonsequential_from_nested(v);
    const auto vals = cs.values();
    for (std::size_t k = 0; k < ncomp; ++k) out[k].add(vals[k]);
    for (std::size_t k = 0; k < 4; ++k)
      out[ComponentSet::kMaxComponents + k].add(cs[kAggregateNames[k]]);
    for (std::size_t k = 0; k < 8; ++k) out[ComponentSet::kMaxComponents + 4 + k].add(v.w[k]);
  }
}

}  // namespace

double MonteCarloResult::std_error_of(ComponentName c) const {
  const auto names = estimate.names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == c) return std_error[i];
  throw StructuralError("component '" + std::string(to_string(c)) + "' is not part of the " +
                        std::string(to_string(estimate.topology())) + " decomposition");
}

MonteCarloResult simulate_linear_components(const LinearScm& scm, const ReferenceConfig& cfg,
                                            std::size_t n, std::uint64_t seed, unsigned threads) {
  if (n == 0) throw DomainError("Monte Carlo sample size must be at least 1");
  scm.validate();
  cfg.validate();
  if (cfg.covariates.size() != scm.covariate_dim())
    throw DomainError("reference covariates have dimension " +
                      std::to_string(cfg.covariates.size()) + ", model expects " +
                      std::to_string(scm.covariate_dim()));
  if (cfg.topology == Topology::NonSequential && (scm.beta[2] != 0.0 || scm.beta[3] != 0.0))
    throw DomainError("non-sequential simulation needs beta[2] = beta[3] = 0");

  std::vector<std::array<Moments, kSlots>> shards(kShards);
  auto shard_size = [&](std::size_t i) { return n / kShards + (i < n % kShards ? 1 : 0); };

  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, kShards);
  if (workers <= 1) {
    for (std::size_t i = 0; i < kShards; ++i) run_shard(scm, cfg, shard_size(i), seed, i, shards[i]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < kShards; i += workers)
          run_shard(scm, cfg, shard_size(i), seed, i, shards[i]);
      });
    for (auto& t : pool) t.join();
  }

  std::array<Moments, kSlots> total{};
  for (const auto& sh : shards)
    for (std::size_t k = 0; k < kSlots; ++k) total[k].merge(sh[k]);

  const std::size_t ncomp = components_of(cfg.topology).size();
  std::vector<double> means(ncomp), ses(ncomp);
  for (std::size_t k = 0; k < ncomp; ++k) {
    means[k] = total[k].average();
    ses[k] = total[k].std_error();
  }
  Aggregates agg, agg_se;
  for (std::size_t k = 0; k < 4; ++k) {
    agg[kAggregateNames[k]] = total[ComponentSet::kMaxComponents + k].average();
    agg_se[kAggregateNames[k]] = total[ComponentSet::kMaxComponents + k].std_error();
  }
  MonteCarloResult r{ComponentSet::from_values(cfg.topology, means, agg), ses, agg_se, {}, {}, n};
  for (std::size_t k = 0; k < 8; ++k) {
    r.nested_mean[k] = total[ComponentSet::kMaxComponents + 4 + k].average();
    r.nested_std_error[k] = total[ComponentSet::kMaxComponents + 4 + k].std_error();
  }
  return r;
}

}  // namespace twomed
