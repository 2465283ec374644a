#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twomed/dataset.hpp"
#include "twomed/linear_model.hpp"
#include "twomed/oracle.hpp"

namespace twomed {

/// Marginal law of the exposure or of one covariate in simulated data.
struct VariableLaw {
  enum class Kind { Bernoulli, Normal };
  Kind kind = Kind::Bernoulli;
  double p = 0.5;      // Bernoulli success probability
  double mean = 0.0;   // Normal
  double sd = 1.0;

  void validate(const std::string& what) const;
};

struct SimulationDesign {
  VariableLaw exposure;
  std::vector<VariableLaw> covariates;  // one per covariate, independent
};

/// n rows drawn from the linear structural model. Deterministic given seed.
Dataset simulate_linear_dataset(const LinearScm& scm, const SimulationDesign& design,
                                std::size_t n, std::uint64_t seed);

/// n rows from a binary model with Pr(A = 1) = p_exposure; the outcome is the
/// cell mean plus N(0, outcome_sd^2) noise. No covariates.
Dataset simulate_binary_dataset(const BinaryScm& scm, double p_exposure, double outcome_sd,
                                std::size_t n, std::uint64_t seed);

}  // namespace twomed
