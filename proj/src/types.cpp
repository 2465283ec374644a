#include "twomed/types.hpp"

#include <algorithm>
#include <cmath>

namespace twomed {

namespace {

constexpr std::array<ComponentName, 9> kSequential = {
    ComponentName::Cde,         ComponentName::IntRefAM1,  ComponentName::IntRefAM2PlusAM1M2,
    ComponentName::NatIntAM1,   ComponentName::NatIntAM2,  ComponentName::NatIntAM1M2,
    ComponentName::NatIntM1M2,  ComponentName::PieM1,      ComponentName::PieM2,
};

constexpr std::array<ComponentName, 10> kNonSequential = {
    ComponentName::Cde,         ComponentName::IntRefAM1,   ComponentName::IntRefAM2,
    ComponentName::IntRefAM1M2, ComponentName::NatIntAM1,   ComponentName::NatIntAM2,
    ComponentName::NatIntAM1M2, ComponentName::NatIntM1M2,  ComponentName::PieM1,
    ComponentName::PieM2,
};

struct NamedComponent {
  ComponentName name;
  std::string_view text;
};

constexpr std::array<NamedComponent, 11> kComponentText = {{
    {ComponentName::Cde, "CDE"},
    {ComponentName::IntRefAM1, "INT_ref_AM1"},
    {ComponentName::IntRefAM2, "INT_ref_AM2"},
    {ComponentName::IntRefAM1M2, "INT_ref_AM1M2"},
    {ComponentName::IntRefAM2PlusAM1M2, "INT_ref_AM2+AM1M2"},
    {ComponentName::NatIntAM1, "NatINT_AM1"},
    {ComponentName::NatIntAM2, "NatINT_AM2"},
    {ComponentName::NatIntAM1M2, "NatINT_AM1M2"},
    {ComponentName::NatIntM1M2, "NatINT_M1M2"},
    {ComponentName::PieM1, "PIE_M1"},
    {ComponentName::PieM2, "PIE_M2"},
}};

std::ptrdiff_t index_in(std::span<const ComponentName> names, ComponentName c) {
  auto it = std::find(names.begin(), names.end(), c);
  return it == names.end() ? -1 : it - names.begin();
}

}  // namespace

std::string_view to_string(Topology t) {
  return t == Topology::Sequential ? "sequential" : "non-sequential";
}

Topology topology_from_string(std::string_view s) {
  if (s == "sequential") return Topology::Sequential;
  if (s == "non-sequential" || s == "nonsequential" || s == "non_sequential")
    return Topology::NonSequential;
  throw ConfigError("unknown topology '" + std::string(s) +
                    "' (expected 'sequential' or 'non-sequential')");
}

std::string_view to_string(ComponentName c) {
  for (const auto& [name, text] : kComponentText)
    if (name == c) return text;
  return "?";
}

std::string_view to_string(AggregateName a) {
  switch (a) {
    case AggregateName::Pde: return "PDE";
    case AggregateName::Tde: return "TDE";
    case AggregateName::SieM1: return "SIE_M1";
    case AggregateName::Te: return "TE";
  }
  return "?";
}

ComponentName component_from_string(std::string_view s) {
  for (const auto& [name, text] : kComponentText)
    if (text == s) return name;
  throw StructuralError("unknown component name '" + std::string(s) + "'");
}

AggregateName aggregate_from_string(std::string_view s) {
  for (auto a : kAggregateNames)
    if (to_string(a) == s) return a;
  throw StructuralError("unknown aggregate name '" + std::string(s) + "'");
}

std::span<const ComponentName> components_of(Topology t) {
  if (t == Topology::Sequential) return kSequential;
  return kNonSequential;
}

void ReferenceConfig::validate() const {
  if (!std::isfinite(a) || !std::isfinite(a_star))
    throw DomainError("exposure levels a and a_star must be finite");
  if (!std::isfinite(m1_star) || !std::isfinite(m2_star))
    throw DomainError("mediator reference levels must be finite");
  for (double c : covariates)
    if (!std::isfinite(c)) throw DomainError("covariate conditioning values must be finite");
}

ExposureSlots exposure_slots(NestedCounterfactual w, const ReferenceConfig& cfg) {
  const double a = cfg.a, s = cfg.a_star;
  switch (w) {
    case NestedCounterfactual::W1: return {a, a, a};
    case NestedCounterfactual::W2: return {a, s, a};
    case NestedCounterfactual::W3: return {a, a, s};
    case NestedCounterfactual::W4: return {s, a, a};
    case NestedCounterfactual::W5: return {s, a, s};
    case NestedCounterfactual::W6: return {s, s, a};
    case NestedCounterfactual::W7: return {a, s, s};
    case NestedCounterfactual::W8: return {s, s, s};
  }
  return {s, s, s};
}

std::string_view to_string(NestedCounterfactual w) {
  static constexpr std::array<std::string_view, 8> kText = {"W1", "W2", "W3", "W4",
                                                            "W5", "W6", "W7", "W8"};
  return kText[static_cast<std::size_t>(w)];
}

double Aggregates::operator[](AggregateName a) const {
  switch (a) {
    case AggregateName::Pde: return pde;
    case AggregateName::Tde: return tde;
    case AggregateName::SieM1: return sie_m1;
    case AggregateName::Te: return te;
  }
  return te;
}

double& Aggregates::operator[](AggregateName a) {
  switch (a) {
    case AggregateName::Pde: return pde;
    case AggregateName::Tde: return tde;
    case AggregateName::SieM1: return sie_m1;
    case AggregateName::Te: return te;
  }
  return te;
}

ComponentSet::ComponentSet(const SequentialTerms& t, const Aggregates& aggregates)
    : ComponentSet(Topology::Sequential, aggregates) {
  values_ = {t.cde,          t.int_ref_am1, t.int_ref_am2_plus_am1m2,
             t.natint_am1,   t.natint_am2,  t.natint_am1m2,
             t.natint_m1m2,  t.pie_m1,      t.pie_m2};
}

ComponentSet::ComponentSet(const NonSequentialTerms& t, const Aggregates& aggregates)
    : ComponentSet(Topology::NonSequential, aggregates) {
  values_ = {t.cde,        t.int_ref_am1,  t.int_ref_am2, t.int_ref_am1m2, t.natint_am1,
             t.natint_am2, t.natint_am1m2, t.natint_m1m2, t.pie_m1,        t.pie_m2};
}

ComponentSet ComponentSet::from_map(Topology topology,
                                    const std::map<ComponentName, double>& values,
                                    const Aggregates& aggregates) {
  ComponentSet cs(topology, aggregates);
  const auto names = components_of(topology);
  for (const auto& [name, v] : values) {
    if (index_in(names, name) < 0)
      throw StructuralError("component '" + std::string(to_string(name)) +
                            "' is not part of the " + std::string(to_string(topology)) +
                            " decomposition");
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto it = values.find(names[i]);
    if (it == values.end())
      throw StructuralError("missing component '" + std::string(to_string(names[i])) + "'");
    cs.values_[i] = it->second;
  }
  return cs;
}

ComponentSet ComponentSet::from_values(Topology topology, std::span<const double> values,
                                       const Aggregates& aggregates) {
  ComponentSet cs(topology, aggregates);
  if (values.size() != cs.size())
    throw StructuralError("expected " + std::to_string(cs.size()) + " component values for the " +
                          std::string(to_string(topology)) + " decomposition, got " +
                          std::to_string(values.size()));
  std::copy(values.begin(), values.end(), cs.values_.begin());
  return cs;
}

bool ComponentSet::contains(ComponentName c) const { return index_in(names(), c) >= 0; }

double ComponentSet::operator[](ComponentName c) const {
  const auto i = index_in(names(), c);
  if (i < 0)
    throw StructuralError("component '" + std::string(to_string(c)) + "' is not part of the " +
                          std::string(to_string(topology_)) + " decomposition");
  return values_[static_cast<std::size_t>(i)];
}

double total_from_components(const ComponentSet& cs) {
  double sum = 0.0;
  for (double v : cs.values()) sum += v;
  return sum;
}

bool sum_identity_holds(const ComponentSet& cs, double rel_tol) {
  const double te = cs[AggregateName::Te];
  return std::abs(total_from_components(cs) - te) <= rel_tol * std::max(1.0, std::abs(te));
}

}  // namespace twomed
