#pragma once

#include <span>

#include "twomed/linear_model.hpp"
#include "twomed/types.hpp"

namespace twomed {

/// E[Y(x, M1(z), M2(w, M1(z))) | c] under the linear models, where M1 enters
/// the outcome both linearly and through E[M1^2] = sigma_m1^2 + E[M1]^2.
double expected_nested_outcome(const ModelCoefficients& m, double x, double w, double z,
                               std::span<const double> covariates);

/// One of W1..W8 at the exposure slots given by exposure_slots(which, cfg).
double expected_counterfactual(NestedCounterfactual which, const ModelCoefficients& m,
                               const ReferenceConfig& cfg);

/// The expanded TE polynomial in (a, a*), up to the (a^4 - a*^4) term.
double total_effect_polynomial(const ModelCoefficients& m, const ReferenceConfig& cfg);

/// Nine components from the expanded per-component formulas, TE from
/// total_effect_polynomial. Requires cfg.topology == Sequential.
ComponentSet decompose_sequential_closed_form(const ModelCoefficients& m,
                                              const ReferenceConfig& cfg);

/// Ten components. Requires beta[2] = beta[3] = 0 (no M1 -> M2 path) and
/// cfg.topology == NonSequential; DomainError otherwise.
ComponentSet decompose_nonsequential_closed_form(const ModelCoefficients& m,
                                                 const ReferenceConfig& cfg);

/// Dispatches on cfg.topology.
ComponentSet decompose_closed_form(const ModelCoefficients& m, const ReferenceConfig& cfg);

}  // namespace twomed
