#pragma once

#include <map>
#include <span>
#include <tuple>
#include <vector>

#include "twomed/dataset.hpp"
#include "twomed/oracle.hpp"
#include "twomed/types.hpp"

namespace twomed {

/// Plug-in conditional tables for categorical A, M1, M2 within covariate
/// strata. Distributions are stored as probability vectors over the sorted
/// mediator supports.
struct ProbTables {
  std::vector<double> support_a, support_m1, support_m2;
  std::vector<std::vector<double>> strata;  // distinct covariate patterns, sorted

  using M1Key = std::tuple<std::size_t, double>;                  // (stratum, a)
  using M2Key = std::tuple<std::size_t, double, double>;          // (stratum, a, m1)
  using CellKey = std::tuple<std::size_t, double, double, double>;  // (stratum, a, m1, m2)

  std::map<M1Key, std::vector<double>> pr_m1;  // Pr(M1 = . | a, c)
  std::map<M2Key, std::vector<double>> pr_m2;  // Pr(M2 = . | a, m1, c)
  std::map<CellKey, double> p_y;               // E[Y | a, m1, m2, c]
  std::map<CellKey, std::size_t> cell_count;   // empty when built from a model

  /// Index of the stratum equal to c. DomainError if absent.
  std::size_t stratum_index(std::span<const double> c) const;

  const std::vector<double>& dist_m1(std::size_t stratum, double a) const;
  const std::vector<double>& dist_m2(std::size_t stratum, double a, double m1) const;
  double outcome_mean(std::size_t stratum, double a, double m1, double m2) const;

  /// Each stored distribution sums to 1 within 1e-9 and has the support's
  /// length. Throws EstimationError.
  void validate() const;
};

/// Saturated frequency estimates. A, M1, M2 and every covariate must take at
/// most 64 distinct values (DataError otherwise). EstimationError if the
/// stratum named by cfg.covariates has no rows at a or a*.
ProbTables estimate_tables(const Dataset& d, const ReferenceConfig& cfg);

/// The true tables of a binary model, one empty stratum.
ProbTables tables_from_binary_scm(const BinaryScm& scm);

/// Nine expected sequential components from iterated conditional sums. Cells
/// that receive zero weight may be absent; a positively weighted empty cell is
/// an EstimationError. Levels outside the supports are a DomainError.
ComponentSet decompose_empirical_sequential(const ProbTables& t, const ReferenceConfig& cfg);

}  // namespace twomed
