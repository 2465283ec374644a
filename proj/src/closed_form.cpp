#include "twomed/closed_form.hpp"

#include <string>

namespace twomed {

namespace {

void check_inputs(const ModelCoefficients& m, const ReferenceConfig& cfg) {
  m.validate();
  cfg.validate();
  if (cfg.covariates.size() != m.covariate_dim())
    throw DomainError("reference covariates have dimension " +
                      std::to_string(cfg.covariates.size()) + ", model expects " +
                      std::to_string(m.covariate_dim()));
}

// Quantities shared by the per-component formulas.
struct Pieces {
  double t[8];
  double b0, b1, b2, b3, g0, g1;
  double var_m1;
  double tc, bc, gc;
  double a, s, d;
  double r1, r2;
  double g_base;  // E[M1] at exposure 0: g0 + gamma_c'c
  double g_star;  // E[M1] at a*
  double b_base;  // b0 + beta_c'c
  double b_star;  // b0 + b1 a* + beta_c'c
  double slope_star;  // b2 + b3 a*, the M1 coefficient of M2 at a*
};

Pieces pieces(const ModelCoefficients& m, const ReferenceConfig& cfg) {
  Pieces p{};
  for (int i = 0; i < 8; ++i) p.t[i] = m.theta[i];
  p.b0 = m.beta[0];
  p.b1 = m.beta[1];
  p.b2 = m.beta[2];
  p.b3 = m.beta[3];
  p.g0 = m.gamma[0];
  p.g1 = m.gamma[1];
  p.var_m1 = m.sigma_m1 * m.sigma_m1;
  p.tc = dot(m.theta_c, cfg.covariates);
  p.bc = dot(m.beta_c, cfg.covariates);
  p.gc = dot(m.gamma_c, cfg.covariates);
  p.a = cfg.a;
  p.s = cfg.a_star;
  p.d = cfg.a - cfg.a_star;
  p.r1 = cfg.m1_star;
  p.r2 = cfg.m2_star;
  p.g_base = p.g0 + p.gc;
  p.g_star = p.g0 + p.g1 * p.s + p.gc;
  p.b_base = p.b0 + p.bc;
  p.b_star = p.b0 + p.b1 * p.s + p.bc;
  p.slope_star = p.b2 + p.b3 * p.s;
  return p;
}

struct Shared {
  double cde, int_ref_am1, natint_am1, natint_am2, natint_am1m2, natint_m1m2, pie_m1, pie_m2;
};

Shared shared_terms(const Pieces& p) {
  const auto& t = p.t;
  const double d = p.d, s = p.s, sum_as = p.a + p.s;
  const double G = p.g_base, Gs = p.g_star, Bs = p.b_star, c2 = p.slope_star;
  const double g1 = p.g1, b1 = p.b1, b3 = p.b3, v = p.var_m1;
  const double t3s = t[3] + t[5] * s, t6s = t[6] + t[7] * s, t2s = t[2] + t[4] * s;

  Shared r;
  r.cde = (t[1] + t[4] * p.r1 + t[5] * p.r2 + t[7] * p.r1 * p.r2) * d;
  r.int_ref_am1 = (Gs - p.r1) * (t[4] + t[7] * p.r2) * d;
  r.natint_am1 = (t[4] * g1 + t[7] * g1 * Bs + t[5] * g1 * c2 + 2 * t[7] * g1 * c2 * G +
                  t[7] * g1 * g1 * c2 * sum_as) *
                 d * d;
  r.natint_am2 = (t[5] * b1 + t[7] * b1 * Gs + t[5] * b3 * Gs + t[7] * b3 * (v + Gs * Gs)) * d * d;
  r.natint_am1m2 = (t[7] * b1 * g1 + t[5] * b3 * g1 + 2 * t[7] * b3 * g1 * G +
                    t[7] * b3 * g1 * g1 * sum_as) *
                   d * d * d;
  r.natint_m1m2 = (b1 * g1 * t6s + b3 * g1 * t3s + 2 * b3 * g1 * t6s * G +
                   b3 * g1 * g1 * t6s * sum_as) *
                  d * d;
  r.pie_m1 = (g1 * t2s + g1 * t6s * Bs + g1 * t3s * c2 + 2 * g1 * t6s * c2 * G +
              g1 * g1 * t6s * c2 * sum_as) *
             d;
  r.pie_m2 = (b1 * t3s + b1 * t6s * Gs + b3 * t3s * Gs + b3 * t6s * (v + Gs * Gs)) * d;
  return r;
}

}  // namespace

double expected_nested_outcome(const ModelCoefficients& m, double x, double w, double z,
                               std::span<const double> covariates) {
  const auto& t = m.theta;
  const double mu1 = m.gamma[0] + m.gamma[1] * z + dot(m.gamma_c, covariates);
  const double m2_base = m.beta[0] + m.beta[1] * w + dot(m.beta_c, covariates);
  const double m2_slope = m.beta[2] + m.beta[3] * w;
  const double second_moment = m.sigma_m1 * m.sigma_m1 + mu1 * mu1;
  return (t[0] + t[1] * x + dot(m.theta_c, covariates)) +
         (t[3] + t[5] * x) * (m2_base + m2_slope * mu1) + (t[2] + t[4] * x) * mu1 +
         (t[6] + t[7] * x) * (m2_base * mu1 + m2_slope * second_moment);
}

double expected_counterfactual(NestedCounterfactual which, const ModelCoefficients& m,
                               const ReferenceConfig& cfg) {
  check_inputs(m, cfg);
  const auto slots = exposure_slots(which, cfg);
  return expected_nested_outcome(m, slots.outcome, slots.mediator2, slots.mediator1,
                                 cfg.covariates);
}

double total_effect_polynomial(const ModelCoefficients& m, const ReferenceConfig& cfg) {
  check_inputs(m, cfg);
  const auto p = pieces(m, cfg);
  const auto& t = p.t;
  const double G = p.g_base, B0 = p.b_base, v = p.var_m1;
  const double g1 = p.g1, b1 = p.b1, b2 = p.b2, b3 = p.b3;
  const double a = p.a, s = p.s;
  const double a2 = a * a, s2 = s * s;

  const double linear = t[1] + t[5] * B0 + b1 * t[3] + t[4] * G + g1 * t[2] + t[7] * B0 * G +
                        b1 * t[6] * G + g1 * t[6] * B0 + t[5] * b2 * G + t[3] * b3 * G +
                        t[3] * b2 * g1 + t[7] * b2 * v + t[6] * b3 * v + t[7] * b2 * G * G +
                        t[6] * b3 * G * G + 2 * g1 * t[6] * b2 * G;
  const double quadratic = b1 * t[5] + g1 * t[4] + b1 * t[7] * G + g1 * t[7] * B0 +
                           g1 * b1 * t[6] + t[5] * b3 * G + t[5] * b2 * g1 + t[3] * b3 * g1 +
                           t[7] * b3 * v + t[7] * b3 * G * G + 2 * g1 * t[7] * b2 * G +
                           2 * g1 * t[6] * b3 * G + t[6] * b2 * g1 * g1;
  const double cubic = g1 * b1 * t[7] + t[5] * b3 * g1 + 2 * g1 * t[7] * b3 * G +
                       t[7] * b2 * g1 * g1 + t[6] * b3 * g1 * g1;
  const double quartic = t[7] * b3 * g1 * g1;

  return linear * (a - s) + quadratic * (a2 - s2) + cubic * (a2 * a - s2 * s) +
         quartic * (a2 * a2 - s2 * s2);
}

ComponentSet decompose_sequential_closed_form(const ModelCoefficients& m,
                                              const ReferenceConfig& cfg) {
  if (cfg.topology != Topology::Sequential)
    throw DomainError("decompose_sequential_closed_form needs a sequential reference config");
  check_inputs(m, cfg);
  const auto p = pieces(m, cfg);
  const auto& t = p.t;
  const auto sh = shared_terms(p);
  const double Gs = p.g_star, Bs = p.b_star, c2 = p.slope_star;

  SequentialTerms r;
  r.cde = sh.cde;
  r.int_ref_am1 = sh.int_ref_am1;
  r.int_ref_am2_plus_am1m2 = (t[5] * Bs + t[7] * Bs * Gs + t[5] * c2 * Gs +
                              t[7] * c2 * (p.var_m1 + Gs * Gs) - t[5] * p.r2 - t[7] * p.r2 * Gs) *
                             p.d;
  r.natint_am1 = sh.natint_am1;
  r.natint_am2 = sh.natint_am2;
  r.natint_am1m2 = sh.natint_am1m2;
  r.natint_m1m2 = sh.natint_m1m2;
  r.pie_m1 = sh.pie_m1;
  r.pie_m2 = sh.pie_m2;

  Aggregates agg;
  agg.pde = r.cde + r.int_ref_am1 + r.int_ref_am2_plus_am1m2;
  agg.tde = agg.pde + r.natint_am1 + r.natint_am2 + r.natint_am1m2;
  agg.sie_m1 = r.pie_m1 + r.natint_m1m2;
  agg.te = total_effect_polynomial(m, cfg);
  return ComponentSet(r, agg);
}

ComponentSet decompose_nonsequential_closed_form(const ModelCoefficients& m,
                                                 const ReferenceConfig& cfg) {
  if (cfg.topology != Topology::NonSequential)
    throw DomainError(
        "decompose_nonsequential_closed_form needs a non-sequential reference config");
  if (m.beta[2] != 0.0 || m.beta[3] != 0.0)
    throw DomainError(
        "non-sequential topology has no M1 -> M2 path: beta[2] and beta[3] must be 0");
  check_inputs(m, cfg);
  const auto p = pieces(m, cfg);
  const auto& t = p.t;
  const auto sh = shared_terms(p);
  const double m2_gap = p.b_star - p.r2;  // E[M2(a*)] - m2*
  const double m1_gap = p.g_star - p.r1;  // E[M1(a*)] - m1*

  NonSequentialTerms r;
  r.cde = sh.cde;
  r.int_ref_am1 = sh.int_ref_am1;
  r.int_ref_am2 = (t[5] + t[7] * p.r1) * m2_gap * p.d;
  r.int_ref_am1m2 = t[7] * m1_gap * m2_gap * p.d;
  r.natint_am1 = sh.natint_am1;
  r.natint_am2 = sh.natint_am2;
  r.natint_am1m2 = sh.natint_am1m2;
  r.natint_m1m2 = sh.natint_m1m2;
  r.pie_m1 = sh.pie_m1;
  r.pie_m2 = sh.pie_m2;

  Aggregates agg;
  agg.pde = r.cde + r.int_ref_am1 + r.int_ref_am2 + r.int_ref_am1m2;
  agg.tde = agg.pde + r.natint_am1 + r.natint_am2 + r.natint_am1m2;
  agg.sie_m1 = r.pie_m1 + r.natint_m1m2;
  agg.te = total_effect_polynomial(m, cfg);
  return ComponentSet(r, agg);
}

ComponentSet decompose_closed_form(const ModelCoefficients& m, const ReferenceConfig& cfg) {
  return cfg.topology == Topology::Sequential ? decompose_sequential_closed_form(m, cfg)
                                              : decompose_nonsequential_closed_form(m, cfg);
}

}  // namespace twomed
