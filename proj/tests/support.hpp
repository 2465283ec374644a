#pragma once

// Random model generators and exact test-side oracles shared by the unit and
// acceptance tests.

#include <array>
#include <cmath>
#include <random>

#include "twomed/linear_model.hpp"
#include "twomed/oracle.hpp"
#include "twomed/types.hpp"

namespace testsupport {

using namespace twomed;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline LinearScm random_linear_scm(std::mt19937_64& rng, std::size_t k, bool sequential = true) {
  LinearScm s;
  for (auto& t : s.theta) t = uniform(rng, -1.0, 1.0);
  for (auto& b : s.beta) b = uniform(rng, -1.0, 1.0);
  for (auto& g : s.gamma) g = uniform(rng, -1.0, 1.0);
  if (!sequential) s.beta[2] = s.beta[3] = 0.0;
  s.theta_c.resize(k);
  s.beta_c.resize(k);
  s.gamma_c.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    s.theta_c[i] = uniform(rng, -0.5, 0.5);
    s.beta_c[i] = uniform(rng, -0.5, 0.5);
    s.gamma_c[i] = uniform(rng, -0.5, 0.5);
  }
  s.sigma_y = uniform(rng, 0.2, 1.5);
  s.sigma_m1 = uniform(rng, 0.2, 1.5);
  s.sigma_m2 = uniform(rng, 0.2, 1.5);
  return s;
}

inline ReferenceConfig random_config(std::mt19937_64& rng, std::size_t k, Topology t) {
  ReferenceConfig cfg;
  cfg.a = uniform(rng, -2.0, 2.0);
  cfg.a_star = uniform(rng, -2.0, 2.0);
  cfg.m1_star = uniform(rng, -2.0, 2.0);
  cfg.m2_star = uniform(rng, -2.0, 2.0);
  cfg.covariates.resize(k);
  for (auto& c : cfg.covariates) c = uniform(rng, -1.0, 1.0);
  cfg.topology = t;
  return cfg;
}

inline BinaryScm random_binary_scm(std::mt19937_64& rng, Topology t) {
  BinaryScm s;
  s.topology = t;
  for (auto& p : s.p_m1_given_a) p = uniform(rng, 0.0, 1.0);
  for (auto& row : s.p_m2_given_a_m1)
    for (auto& p : row) p = uniform(rng, 0.0, 1.0);
  if (t == Topology::NonSequential)
    for (auto& row : s.p_m2_given_a_m1) row[1] = row[0];
  for (auto& plane : s.e_y)
    for (auto& row : plane)
      for (auto& y : row) y = uniform(rng, -3.0, 3.0);
  return s;
}

// Potentials of one individual of a linear SCM with given error draws.
inline auto linear_individual(const LinearScm& s, const ReferenceConfig& cfg, double e1,
                              double e2, double ey) {
  const double tc = dot(s.theta_c, cfg.covariates);
  const double bc = dot(s.beta_c, cfg.covariates);
  const double gc = dot(s.gamma_c, cfg.covariates);
  return make_potentials(
      [=](double a) { return s.gamma[0] + s.gamma[1] * a + gc + e1; },
      [=](double a, double m1) {
        return s.beta[0] + s.beta[1] * a + s.beta[2] * m1 + s.beta[3] * a * m1 + bc + e2;
      },
      [=](double a, double m1, double m2) {
        const auto& t = s.theta;
        return t[0] + t[1] * a + t[2] * m1 + t[3] * m2 + t[4] * a * m1 + t[5] * a * m2 +
               t[6] * m1 * m2 + t[7] * a * m1 * m2 + tc + ey;
      });
}

// Expected components of a linear SCM computed by averaging the individual
// contrasts over a 3-point Gauss-Hermite rule for the M1 error. Every
// individual component is a polynomial of degree <= 2 in that error and affine
// in the other two, so the rule is exact and the errors of M2 and Y may be
// held at 0.
inline ComponentSet quadrature_components(const LinearScm& s, const ReferenceConfig& cfg) {
  const double r3 = std::sqrt(3.0);
  const std::array<double, 3> nodes = {-r3, 0.0, r3};
  const std::array<double, 3> weights = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
  std::array<double, ComponentSet::kMaxComponents> sum{};
  Aggregates agg;
  std::size_t size = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto p = linear_individual(s, cfg, s.sigma_m1 * nodes[i], 0.0, 0.0);
    const auto cs = individual_components(p, cfg);
    size = cs.size();
    for (std::size_t k = 0; k < size; ++k) sum[k] += weights[i] * cs.values()[k];
    for (auto a : kAggregateNames) agg[a] += weights[i] * cs[a];
  }
  return ComponentSet::from_values(cfg.topology, std::span<const double>(sum.data(), size), agg);
}

inline double scale_of(const ComponentSet& cs) {
  double m = 1.0;
  for (double v : cs.values()) m = std::max(m, std::abs(v));
  for (auto a : kAggregateNames) m = std::max(m, std::abs(cs[a]));
  return m;
}

}  // namespace testsupport
