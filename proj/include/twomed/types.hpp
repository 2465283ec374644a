#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace twomed {

// ---------------------------------------------------------------------------
// Errors. Each maps onto one CLI exit code (see tools/twomed_cli.cpp).

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A component set is missing a name, or holds one its topology forbids.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Inputs violate a documented precondition (levels, dimensions, n = 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Model fitting or table estimation could not produce an estimate.
class EstimationError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------

enum class Topology { Sequential, NonSequential };

std::string_view to_string(Topology t);
Topology topology_from_string(std::string_view s);

/// Every decomposition term either topology can produce. Which subset a
/// ComponentSet may hold is fixed by its topology: a sequential set has no
/// separate IntRefAM2 / IntRefAM1M2 (only their identifiable sum).
enum class ComponentName {
  Cde,
  IntRefAM1,
  IntRefAM2,
  IntRefAM1M2,
  IntRefAM2PlusAM1M2,
  NatIntAM1,
  NatIntAM2,
  NatIntAM1M2,
  NatIntM1M2,
  PieM1,
  PieM2,
};

enum class AggregateName { Pde, Tde, SieM1, Te };

inline constexpr std::array<AggregateName, 4> kAggregateNames = {
    AggregateName::Pde, AggregateName::Tde, AggregateName::SieM1, AggregateName::Te};

std::string_view to_string(ComponentName c);
std::string_view to_string(AggregateName a);
ComponentName component_from_string(std::string_view s);
AggregateName aggregate_from_string(std::string_view s);

/// Canonical (report) order of the components for a topology.
std::span<const ComponentName> components_of(Topology t);

// ---------------------------------------------------------------------------

struct ReferenceConfig {
  double a = 1.0;
  double a_star = 0.0;
  double m1_star = 0.0;
  double m2_star = 0.0;
  std::vector<double> covariates;
  Topology topology = Topology::Sequential;

  /// Throws DomainError when a or a_star is not finite.
  void validate() const;
};

/// The eight expected nested counterfactuals E[Y(x, M1(z), M2(w, M1(z))) | c]
/// from which every sequential component is a signed combination.
enum class NestedCounterfactual { W1, W2, W3, W4, W5, W6, W7, W8 };

inline constexpr std::array<NestedCounterfactual, 8> kNestedCounterfactuals = {
    NestedCounterfactual::W1, NestedCounterfactual::W2, NestedCounterfactual::W3,
    NestedCounterfactual::W4, NestedCounterfactual::W5, NestedCounterfactual::W6,
    NestedCounterfactual::W7, NestedCounterfactual::W8};

/// Exposure values fed to the outcome (x), to M2 (w) and to M1 (z).
struct ExposureSlots {
  double outcome;
  double mediator2;
  double mediator1;
};

/// W1 = (a, a, a), W2 = (a, a*, a), W3 = (a, a, a*), W4 = (a*, a, a),
/// W5 = (a*, a, a*), W6 = (a*, a*, a), W7 = (a, a*, a*), W8 = (a*, a*, a*).
ExposureSlots exposure_slots(NestedCounterfactual w, const ReferenceConfig& cfg);

std::string_view to_string(NestedCounterfactual w);

struct SequentialTerms {
  double cde = 0;
  double int_ref_am1 = 0;
  double int_ref_am2_plus_am1m2 = 0;
  double natint_am1 = 0;
  double natint_am2 = 0;
  double natint_am1m2 = 0;
  double natint_m1m2 = 0;
  double pie_m1 = 0;
  double pie_m2 = 0;
};

struct NonSequentialTerms {
  double cde = 0;
  double int_ref_am1 = 0;
  double int_ref_am2 = 0;
  double int_ref_am1m2 = 0;
  double natint_am1 = 0;
  double natint_am2 = 0;
  double natint_am1m2 = 0;
  double natint_m1m2 = 0;
  double pie_m1 = 0;
  double pie_m2 = 0;
};

struct Aggregates {
  double pde = 0;
  double tde = 0;
  double sie_m1 = 0;
  double te = 0;

  double operator[](AggregateName a) const;
  double& operator[](AggregateName a);
};

/// Immutable decomposition result: the components of one topology in
/// canonical order, plus the PDE / TDE / SIE_M1 / TE aggregates.
class ComponentSet {
 public:
  static constexpr std::size_t kMaxComponents = 10;

  ComponentSet(const SequentialTerms& terms, const Aggregates& aggregates);
  ComponentSet(const NonSequentialTerms& terms, const Aggregates& aggregates);

  /// Builds a set from a name -> value map, e.g. parsed from JSON. Throws
  /// StructuralError naming the first absent key, or any key the topology
  /// does not admit.
  static ComponentSet from_map(Topology topology, const std::map<ComponentName, double>& values,
                               const Aggregates& aggregates);

  /// Values in canonical order, aligned with components_of(topology).
  static ComponentSet from_values(Topology topology, std::span<const double> values,
                                  const Aggregates& aggregates);

  Topology topology() const { return topology_; }
  std::span<const ComponentName> names() const { return components_of(topology_); }
  std::size_t size() const { return names().size(); }
  std::span<const double> values() const { return {values_.data(), size()}; }

  bool contains(ComponentName c) const;
  /// Throws StructuralError if the topology has no such component.
  double operator[](ComponentName c) const;

  const Aggregates& aggregates() const { return aggregates_; }
  double operator[](AggregateName a) const { return aggregates_[a]; }

 private:
  ComponentSet(Topology topology, const Aggregates& aggregates)
      : topology_(topology), aggregates_(aggregates) {}

  Topology topology_;
  std::array<double, kMaxComponents> values_{};
  Aggregates aggregates_;
};

/// Arithmetic sum of all components. Callers compare it against TE.
double total_from_components(const ComponentSet& cs);

/// |sum(components) - TE| <= rel_tol * max(1, |TE|).
bool sum_identity_holds(const ComponentSet& cs, double rel_tol = 1e-10);

/// Single-mediator two-way and four-way decompositions side by side.
struct SingleMediatorComponents {
  double cde = 0;
  double int_ref = 0;
  double int_med = 0;
  double pie = 0;
  double nde = 0;
  double nie = 0;
  double te = 0;
};

}  // namespace twomed
