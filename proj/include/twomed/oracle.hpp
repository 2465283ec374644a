#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "twomed/linear_model.hpp"
#include "twomed/types.hpp"

namespace twomed {

/// Potential-value functions of one individual. The callables are template
/// parameters so the Monte Carlo loop can inline them; IndividualPotentials is
/// the type-erased version for everything else.
template <class M1Fn, class M2Fn, class YFn>
struct Potentials {
  M1Fn m1_of;  // a -> M1(a)
  M2Fn m2_of;  // (a, m1) -> M2(a, m1)
  YFn y_of;    // (a, m1, m2) -> Y(a, m1, m2)
};

template <class M1Fn, class M2Fn, class YFn>
Potentials<M1Fn, M2Fn, YFn> make_potentials(M1Fn m1, M2Fn m2, YFn y) {
  return {std::move(m1), std::move(m2), std::move(y)};
}

using IndividualPotentials =
    Potentials<std::function<double(double)>, std::function<double(double, double)>,
               std::function<double(double, double, double)>>;

namespace detail {

struct NestedValues {
  // n(x, w, z) = Y(x, M1(z), M2(w, M1(z))) over the eight slot patterns, W1..W8.
  std::array<double, 8> w{};
  // Y with one or both mediators pinned at their reference levels.
  double y_a_ref = 0, y_s_ref = 0;            // y(., m1*, m2*)
  double y_a_m1s_ref = 0, y_s_m1s_ref = 0;    // y(., M1(a*), m2*)
  double y_a_ref_m2s = 0, y_s_ref_m2s = 0;    // y(., m1*, M2(a*, m1*))
};

template <class P>
NestedValues nested_values(const P& p, const ReferenceConfig& cfg) {
  const double a = cfg.a, s = cfg.a_star;
  const double m1s = p.m1_of(s);
  NestedValues v;
  for (std::size_t k = 0; k < 8; ++k) {
    const auto slots = exposure_slots(kNestedCounterfactuals[k], cfg);
    const double m1z = p.m1_of(slots.mediator1);
    v.w[k] = p.y_of(slots.outcome, m1z, p.m2_of(slots.mediator2, m1z));
  }
  v.y_a_ref = p.y_of(a, cfg.m1_star, cfg.m2_star);
  v.y_s_ref = p.y_of(s, cfg.m1_star, cfg.m2_star);
  v.y_a_m1s_ref = p.y_of(a, m1s, cfg.m2_star);
  v.y_s_m1s_ref = p.y_of(s, m1s, cfg.m2_star);
  const double m2s_ref = p.m2_of(s, cfg.m1_star);
  v.y_a_ref_m2s = p.y_of(a, cfg.m1_star, m2s_ref);
  v.y_s_ref_m2s = p.y_of(s, cfg.m1_star, m2s_ref);
  return v;
}

Aggregates aggregates_from_nested(const std::array<double, 8>& w);
ComponentSet sequential_from_nested(const NestedValues& v);
ComponentSet nonsequential_from_nested(const NestedValues& v);

}  // namespace detail

/// Nine-component decomposition of one individual's TE when M1 may cause M2.
template <class P>
ComponentSet individual_components_sequential(const P& p, const ReferenceConfig& cfg) {
  if (cfg.topology != Topology::Sequential)
    throw DomainError("individual_components_sequential needs a sequential reference config");
  return detail::sequential_from_nested(detail::nested_values(p, cfg));
}

/// Ten-component decomposition when M1 and M2 are not causally ordered.
/// Throws DomainError if m2_of responds to its m1 argument at the levels used.
template <class P>
ComponentSet individual_components_nonsequential(const P& p, const ReferenceConfig& cfg) {
  if (cfg.topology != Topology::NonSequential)
    throw DomainError(
        "individual_components_nonsequential needs a non-sequential reference config");
  const double probes[3] = {p.m1_of(cfg.a), p.m1_of(cfg.a_star), cfg.m1_star};
  for (double x : {cfg.a, cfg.a_star}) {
    const double base = p.m2_of(x, probes[0]);
    for (double m1 : probes)
      if (p.m2_of(x, m1) != base)
        throw DomainError("m2_of depends on m1, which the non-sequential topology forbids");
  }
  return detail::nonsequential_from_nested(detail::nested_values(p, cfg));
}

template <class P>
ComponentSet individual_components(const P& p, const ReferenceConfig& cfg) {
  return cfg.topology == Topology::Sequential ? individual_components_sequential(p, cfg)
                                              : individual_components_nonsequential(p, cfg);
}

template <class MFn, class YFn>
struct SingleMediatorPotentials {
  MFn m_of;  // a -> M(a)
  YFn y_of;  // (a, m) -> Y(a, m)
};

/// Two-way and four-way single-mediator decomposition. The mediator reference
/// level m* is taken from cfg.m1_star.
template <class P>
SingleMediatorComponents single_mediator_four_way(const P& p, const ReferenceConfig& cfg) {
  const double a = cfg.a, s = cfg.a_star, ms = cfg.m1_star;
  const double ma = p.m_of(a), msx = p.m_of(s);
  const double y_a_ma = p.y_of(a, ma), y_s_ma = p.y_of(s, ma);
  const double y_a_ms = p.y_of(a, msx), y_s_ms = p.y_of(s, msx);
  const double y_a_ref = p.y_of(a, ms), y_s_ref = p.y_of(s, ms);
  SingleMediatorComponents r;
  r.cde = y_a_ref - y_s_ref;
  r.int_ref = y_a_ms - y_s_ms - y_a_ref + y_s_ref;
  r.int_med = y_a_ma - y_s_ma - y_a_ms + y_s_ms;
  r.pie = y_s_ma - y_s_ms;
  r.nde = y_a_ms - y_s_ms;
  r.nie = y_a_ma - y_a_ms;
  r.te = y_a_ma - y_s_ms;
  return r;
}

// ---------------------------------------------------------------------------
// Binary structural models

struct BinaryScm {
  std::array<double, 2> p_m1_given_a{};                       // Pr(M1 = 1 | a)
  std::array<std::array<double, 2>, 2> p_m2_given_a_m1{};     // Pr(M2 = 1 | a, m1)
  std::array<std::array<std::array<double, 2>, 2>, 2> e_y{};  // E[Y | a, m1, m2]
  Topology topology = Topology::Sequential;

  /// Probabilities in [0, 1], finite outcome means, and for the
  /// non-sequential topology Pr(M2 | a, m1) constant in m1.
  void validate() const;
};

/// Exact expected components via iterated expectations over the true tables.
/// cfg levels must be 0 or 1 (DomainError otherwise).
ComponentSet enumerate_binary_components(const BinaryScm& scm, const ReferenceConfig& cfg);

/// The individual with latent uniforms (u_m1, u_m2): M1(a) = 1 iff
/// u_m1 < Pr(M1=1|a), M2(a, m1) = 1 iff u_m2 < Pr(M2=1|a,m1), Y = E[Y|a,m1,m2].
IndividualPotentials binary_individual(const BinaryScm& scm, double u_m1, double u_m2);

/// Average of individual components over the unit square of (u_m1, u_m2),
/// computed exactly by splitting it into cells on which every potential value
/// is constant.
ComponentSet latent_enumeration_components(const BinaryScm& scm, const ReferenceConfig& cfg);

// ---------------------------------------------------------------------------
// Monte Carlo for linear Gaussian models

struct MonteCarloResult {
  ComponentSet estimate;
  std::vector<double> std_error;  // aligned with estimate.names()
  Aggregates aggregate_std_error;
  std::array<double, 8> nested_mean{};  // W1..W8
  std::array<double, 8> nested_std_error{};
  std::size_t n = 0;

  double std_error_of(ComponentName c) const;
};

/// Draws n individuals (one error triple each, shared across all counterfactual
/// worlds) and averages their individual components. The result depends only on
/// (scm, cfg, n, seed), never on the thread count. NonSequential needs
/// beta[2] = beta[3] = 0.
MonteCarloResult simulate_linear_components(const LinearScm& scm, const ReferenceConfig& cfg,
                                            std::size_t n, std::uint64_t seed,
                                            unsigned threads = 0);

}  // namespace twomed
