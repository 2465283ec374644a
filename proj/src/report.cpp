#include <cmath>
#include <cstdio>
#include <sstream>

#include "twomed/closed_form.hpp"
#include "twomed/io.hpp"

namespace twomed::io {

namespace {

std::string fmt(double x, int digits = 6) {
  if (!std::isfinite(x)) return format_number(x);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

Json interval_json(double estimate, const std::optional<Interval>& ci) {
  Json j;
  j["estimate"] = estimate;
  j["ci_lower"] = ci ? Json(ci->lower) : Json(nullptr);
  j["ci_upper"] = ci ? Json(ci->upper) : Json(nullptr);
  return j;
}

Json ols_json(const OlsFit& f) {
  Json terms = Json::array();
  for (std::size_t i = 0; i < f.names.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    Json t;
    t["term"] = f.names[i];
    t["estimate"] = f.coef[idx];
    t["std_error"] = f.std_error.size() > idx ? Json(f.std_error[idx]) : Json(nullptr);
    terms.push_back(t);
  }
  Json j;
  j["terms"] = terms;
  j["sigma"] = f.sigma;
  j["r_squared"] = f.r_squared;
  j["n"] = f.n;
  return j;
}

std::string level_label(double level) { return fmt(level * 100.0, 4) + "% CI"; }

void check_exact(std::vector<ValidationCheck>& out, const std::string& path,
                 const std::string& reference, const std::string& quantity, double value,
                 double expected, double rel_tol, double scale) {
  ValidationCheck c;
  c.path = path;
  c.reference = reference;
  c.quantity = quantity;
  c.value = value;
  c.expected = expected;
  c.delta = value - expected;
  c.tolerance = rel_tol * std::max({1.0, std::abs(expected), scale});
  c.pass = std::abs(c.delta) <= c.tolerance;
  out.push_back(c);
}

void compare_sets(std::vector<ValidationCheck>& out, const std::string& path,
                  const std::string& reference, const ComponentSet& value,
                  const ComponentSet& expected, double rel_tol) {
  for (auto name : expected.names())
    check_exact(out, path, reference, std::string(to_string(name)), value[name], expected[name],
                rel_tol, 0.0);
  for (auto agg : kAggregateNames)
    check_exact(out, path, reference, std::string(to_string(agg)), value[agg], expected[agg],
                rel_tol, 0.0);
}

void check_sum_identity(std::vector<ValidationCheck>& out, const std::string& path,
                        const ComponentSet& cs, double rel_tol) {
  check_exact(out, path, "sum of components", "TE", cs[AggregateName::Te],
              total_from_components(cs), rel_tol, 0.0);
}

}  // namespace

Json component_set_to_json(const ComponentSet& cs) {
  Json comps = Json::array();
  for (auto name : cs.names()) {
    Json c;
    c["name"] = std::string(to_string(name));
    c["value"] = cs[name];
    comps.push_back(c);
  }
  Json agg;
  for (auto a : kAggregateNames) agg[std::string(to_string(a))] = cs[a];
  Json j;
  j["components"] = comps;
  j["aggregates"] = agg;
  return j;
}

Json reference_to_json(const ReferenceConfig& ref, const std::vector<std::string>& names) {
  Json j;
  j["a"] = ref.a;
  j["a_star"] = ref.a_star;
  j["m1_star"] = ref.m1_star;
  j["m2_star"] = ref.m2_star;
  Json cov = Json::object();
  for (std::size_t i = 0; i < ref.covariates.size(); ++i)
    cov[i < names.size() ? names[i] : "C" + std::to_string(i + 1)] = ref.covariates[i];
  j["covariates"] = cov;
  return j;
}

// ---------------------------------------------------------------------------
// analyze

AnalysisReport run_analyze(const RunConfig& cfg, const Dataset& d) {
  if (cfg.estimator == EstimatorKind::EmpiricalCategorical &&
      cfg.topology != Topology::Sequential)
    throw ConfigError(
        "estimator: empirical-categorical is only available for the sequential topology");
  if (cfg.bootstrap_b > 0 && cfg.bootstrap_b < 100)
    throw ConfigError("bootstrap.B: use 0 to skip the bootstrap or at least 100 replicates");
  if (!(cfg.level > 0.0 && cfg.level < 1.0))
    throw ConfigError("bootstrap.level: must lie strictly between 0 and 1");

  const ReferenceConfig ref = resolve_reference(cfg, d);
  std::optional<FittedModels> models;
  std::optional<ProbTables> tables;
  Estimator estimator;
  if (cfg.estimator == EstimatorKind::ClosedForm) {
    models = fit_all(d, cfg.topology);
    estimator = [ref](const Dataset& x) { return linear_model_estimate(x, ref); };
  } else {
    tables = estimate_tables(d, ref);
    estimator = [ref](const Dataset& x) {
      return decompose_empirical_sequential(estimate_tables(x, ref), ref);
    };
  }
  ComponentSet point = estimator(d);
  std::optional<BootstrapResult> boot;
  if (cfg.bootstrap_b > 0)
    boot = bootstrap(d, estimator, cfg.bootstrap_b, cfg.level, cfg.seed, cfg.threads);

  return AnalysisReport{cfg,    ref,           d.covariate_names, d.m1_name, d.m2_name,
                        d.n(),  d.dropped_rows, std::move(point), std::move(boot),
                        std::move(models), std::move(tables)};
}

Json report_to_json(const AnalysisReport& r) {
  Json j;
  j["topology"] = std::string(to_string(r.config.topology));
  j["estimator"] = std::string(to_string(r.config.estimator));
  j["reference"] = reference_to_json(r.reference, r.covariate_names);

  Json comps = Json::array();
  const auto names = r.point.names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    Json c;
    c["name"] = std::string(to_string(names[i]));
    std::optional<Interval> ci;
    if (r.bootstrap) ci = r.bootstrap->components[i];
    const Json v = interval_json(r.point.values()[i], ci);
    for (const auto& [k, x] : v.items()) c[k] = x;
    comps.push_back(c);
  }
  j["components"] = comps;

  Json agg;
  for (std::size_t i = 0; i < kAggregateNames.size(); ++i) {
    std::optional<Interval> ci;
    if (r.bootstrap) ci = r.bootstrap->aggregates[i];
    agg[std::string(to_string(kAggregateNames[i]))] = interval_json(r.point[kAggregateNames[i]], ci);
  }
  j["aggregates"] = agg;

  if (r.models) {
    Json m;
    m["outcome"] = ols_json(r.models->outcome);
    m["mediator2"] = ols_json(r.models->mediator2);
    m["mediator1"] = ols_json(r.models->mediator1);
    m["sigma_m1"] = r.models->residual_sigma_m1;
    j["models"] = m;
  }

  Json meta;
  meta["seed"] = r.config.seed;
  meta["B"] = r.config.bootstrap_b;
  meta["level"] = r.config.level;
  meta["n"] = r.n;
  meta["dropped_rows"] = r.dropped_rows;
  meta["failed_replicates"] = r.bootstrap ? r.bootstrap->failed_replicates : 0;
  meta["columns"] = {{"exposure", r.config.exposure},
                     {"mediator1", r.m1_label},
                     {"mediator2", r.m2_label},
                     {"outcome", r.config.outcome},
                     {"covariates", r.covariate_names}};
  meta["version"] = version();
  j["meta"] = meta;
  return j;
}

std::string report_to_table(const AnalysisReport& r) {
  std::ostringstream out;
  const auto& ref = r.reference;
  out << "Decomposition of the total effect (" << to_string(r.config.topology) << " mediators, "
      << to_string(r.config.estimator) << " estimator)\n";
  out << "Exposure contrast: " << fmt(ref.a) << " vs " << fmt(ref.a_star) << "\n";
  out << "Reference levels: " << r.m1_label << " = " << fmt(ref.m1_star)
      << (r.config.m1_star.is_mean() ? " (mean)" : "") << ", " << r.m2_label << " = "
      << fmt(ref.m2_star) << (r.config.m2_star.is_mean() ? " (mean)" : "") << "\n";
  if (!ref.covariates.empty()) {
    out << "Covariates held at:";
    for (std::size_t i = 0; i < ref.covariates.size(); ++i) {
      const bool mean =
          r.config.covariate_values.empty() || r.config.covariate_values[i].is_mean();
      out << (i ? ", " : " ") << r.covariate_names[i] << " = " << fmt(ref.covariates[i])
          << (mean ? " (mean)" : "");
    }
    out << "\n";
  }
  out << "n = " << r.n << " (" << r.dropped_rows << " rows dropped)";
  if (r.bootstrap)
    out << ", bootstrap B = " << r.config.bootstrap_b << ", seed = " << r.config.seed
        << ", failed replicates = " << r.bootstrap->failed_replicates;
  out << "\n\n";

  const std::size_t w1 = 20, w2 = 14;
  out << pad("Component", w1) << pad("Estimate", w2)
      << (r.bootstrap ? level_label(r.config.level) : "") << "\n";
  auto row = [&](std::string_view name, double est, const Interval* ci) {
    out << pad(std::string(name), w1) << pad(fmt(est, 4), w2);
    if (ci) out << "(" << fmt(ci->lower, 4) << ", " << fmt(ci->upper, 4) << ")";
    out << "\n";
  };
  const auto names = r.point.names();
  for (std::size_t i = 0; i < names.size(); ++i)
    row(to_string(names[i]), r.point.values()[i],
        r.bootstrap ? &r.bootstrap->components[i] : nullptr);
  out << "\n";
  for (std::size_t i = 0; i < kAggregateNames.size(); ++i)
    row(to_string(kAggregateNames[i]), r.point[kAggregateNames[i]],
        r.bootstrap ? &r.bootstrap->aggregates[i] : nullptr);
  return out.str();
}

Json tables_to_json(const ProbTables& t, const std::vector<std::string>& covariate_names) {
  auto key = [](double x) { return format_number(x); };
  Json j;
  j["supports"] = {{"A", t.support_a}, {"M1", t.support_m1}, {"M2", t.support_m2}};
  Json strata = Json::array();
  for (std::size_t s = 0; s < t.strata.size(); ++s) {
    Json st;
    Json cov = Json::object();
    for (std::size_t i = 0; i < t.strata[s].size(); ++i)
      cov[i < covariate_names.size() ? covariate_names[i] : "C" + std::to_string(i + 1)] =
          t.strata[s][i];
    st["covariates"] = cov;

    Json pm1 = Json::object();
    for (const auto& [k, dist] : t.pr_m1) {
      if (std::get<0>(k) != s) continue;
      Json row = Json::object();
      for (std::size_t i = 0; i < dist.size(); ++i) row[key(t.support_m1[i])] = dist[i];
      pm1[key(std::get<1>(k))] = row;
    }
    Json pm2 = Json::object();
    for (const auto& [k, dist] : t.pr_m2) {
      if (std::get<0>(k) != s) continue;
      Json row = Json::object();
      for (std::size_t i = 0; i < dist.size(); ++i) row[key(t.support_m2[i])] = dist[i];
      pm2[key(std::get<1>(k))][key(std::get<2>(k))] = row;
    }
    Json py = Json::object();
    for (const auto& [k, mean] : t.p_y) {
      if (std::get<0>(k) != s) continue;
      Json cell;
      cell["mean"] = mean;
      auto it = t.cell_count.find(k);
      cell["n"] = it == t.cell_count.end() ? Json(nullptr) : Json(it->second);
      py[key(std::get<1>(k))][key(std::get<2>(k))][key(std::get<3>(k))] = cell;
    }
    st["pr_m1_given_a"] = pm1;
    st["pr_m2_given_a_m1"] = pm2;
    st["outcome_mean_given_a_m1_m2"] = py;
    strata.push_back(st);
  }
  j["strata"] = strata;
  return j;
}

// ---------------------------------------------------------------------------
// simulate

SimulationOutput run_simulate(const ScmSpec& spec, const RunConfig& cfg, std::size_t n,
                              std::size_t mc_n) {
  if (n == 0) throw ConfigError("n: the simulated sample needs at least one row");
  Json truth;
  Dataset data;
  ReferenceConfig ref;
  if (const auto* lin = std::get_if<LinearSpec>(&spec.model)) {
    data = simulate_linear_dataset(lin->scm, lin->design, n, cfg.seed);
    data.covariate_names = lin->covariate_names;
    ref = resolve_reference(cfg, data);
    ref.topology = spec.topology;
    truth["model"] = "linear";
    truth["topology"] = std::string(to_string(spec.topology));
    truth["n"] = n;
    truth["seed"] = cfg.seed;
    truth["reference"] = reference_to_json(ref, data.covariate_names);
    Json paths;
    paths["closed_form"] = component_set_to_json(decompose_closed_form(lin->scm.coefficients(), ref));
    if (mc_n > 0) {
      const auto mc = simulate_linear_components(lin->scm, ref, mc_n, cfg.seed, cfg.threads);
      Json m = component_set_to_json(mc.estimate);
      for (std::size_t i = 0; i < mc.std_error.size(); ++i)
        m["components"][i]["std_error"] = mc.std_error[i];
      Json se;
      for (auto a : kAggregateNames) se[std::string(to_string(a))] = mc.aggregate_std_error[a];
      m["aggregate_std_errors"] = se;
      m["n"] = mc_n;
      m["seed"] = cfg.seed;
      paths["monte_carlo"] = m;
    }
    truth["truth"] = paths;
  } else {
    const auto& b = std::get<BinarySpec>(spec.model);
    data = simulate_binary_dataset(b.scm, b.p_exposure, b.outcome_sd, n, cfg.seed);
    ref = resolve_reference(cfg, data);
    ref.topology = spec.topology;
    truth["model"] = "binary";
    truth["topology"] = std::string(to_string(spec.topology));
    truth["n"] = n;
    truth["seed"] = cfg.seed;
    truth["reference"] = reference_to_json(ref, {});
    Json paths;
    paths["enumeration"] = component_set_to_json(enumerate_binary_components(b.scm, ref));
    paths["latent_enumeration"] = component_set_to_json(latent_enumeration_components(b.scm, ref));
    truth["truth"] = paths;
  }
  return SimulationOutput{std::move(data), ref, std::move(truth)};
}

// ---------------------------------------------------------------------------
// validate

ValidationReport run_validate(const ScmSpec& spec, const ReferenceConfig& reference,
                              const ValidationTolerances& tol, std::uint64_t seed) {
  ValidationReport rep;
  rep.topology = spec.topology;
  rep.reference = reference;
  rep.reference.topology = spec.topology;
  const auto& ref = rep.reference;
  auto& checks = rep.checks;

  if (const auto* lin = std::get_if<LinearSpec>(&spec.model)) {
    rep.model = "linear";
    const auto coef = lin->scm.coefficients();
    const ComponentSet cf = decompose_closed_form(coef, ref);
    check_sum_identity(checks, "closed_form", cf, tol.sum_identity);

    // Natural components and aggregates as differences of the eight nested
    // means, computed independently of the per-component formulas.
    std::array<double, 8> w{};
    double scale = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
      w[k] = expected_counterfactual(kNestedCounterfactuals[k], coef, ref);
      scale = std::max(scale, std::abs(w[k]));
    }
    const std::pair<ComponentName, double> natural[] = {
        {ComponentName::NatIntAM1, (w[1] - w[5]) - (w[6] - w[7])},
        {ComponentName::NatIntAM2, (w[2] - w[4]) - (w[6] - w[7])},
        {ComponentName::NatIntAM1M2, ((w[0] - w[3]) - (w[2] - w[4])) - ((w[1] - w[5]) - (w[6] - w[7]))},
        {ComponentName::NatIntM1M2, (w[3] - w[4]) - (w[5] - w[7])},
        {ComponentName::PieM1, w[5] - w[7]},
        {ComponentName::PieM2, w[4] - w[7]},
    };
    for (const auto& [name, v] : natural)
      check_exact(checks, "closed_form", "nested_means", std::string(to_string(name)), cf[name], v,
                  tol.exact, scale);
    const std::pair<AggregateName, double> aggs[] = {
        {AggregateName::Pde, w[6] - w[7]},
        {AggregateName::Tde, w[0] - w[3]},
        {AggregateName::SieM1, w[3] - w[4]},
        {AggregateName::Te, w[0] - w[7]},
    };
    for (const auto& [name, v] : aggs)
      check_exact(checks, "closed_form", "nested_means", std::string(to_string(name)), cf[name], v,
                  tol.exact, scale);

    if (tol.mc_n > 0) {
      const auto mc = simulate_linear_components(lin->scm, ref, tol.mc_n, seed);
      auto band = [&](const std::string& q, double value, double expected, double se) {
        ValidationCheck c;
        c.path = "monte_carlo";
        c.reference = "closed_form";
        c.quantity = q;
        c.value = value;
        c.expected = expected;
        c.delta = value - expected;
        c.tolerance = tol.se_multiplier * se + tol.exact * std::max({1.0, std::abs(expected), scale});
        c.pass = std::abs(c.delta) <= c.tolerance;
        if (!c.pass) ++rep.exceedances;
        checks.push_back(c);
      };
      const auto names = cf.names();
      for (std::size_t i = 0; i < names.size(); ++i)
        band(std::string(to_string(names[i])), mc.estimate.values()[i], cf.values()[i],
             mc.std_error[i]);
      for (auto a : kAggregateNames)
        band(std::string(to_string(a)), mc.estimate[a], cf[a], mc.aggregate_std_error[a]);
      rep.allowed_exceedances = tol.max_exceedances;
    }
  } else {
    rep.model = "binary";
    auto scm = std::get<BinarySpec>(spec.model).scm;
    scm.topology = spec.topology;
    const ComponentSet e = enumerate_binary_components(scm, ref);
    check_sum_identity(checks, "enumeration", e, tol.sum_identity);
    compare_sets(checks, "latent_enumeration", "enumeration",
                 latent_enumeration_components(scm, ref), e, tol.exact);
    if (spec.topology == Topology::Sequential)
      compare_sets(checks, "empirical_true_tables", "enumeration",
                   decompose_empirical_sequential(tables_from_binary_scm(scm), ref), e, tol.exact);
  }

  rep.passed = rep.exceedances <= rep.allowed_exceedances;
  for (const auto& c : checks)
    if (!c.pass && c.path != "monte_carlo") rep.passed = false;
  return rep;
}

Json validation_to_json(const ValidationReport& r) {
  Json j;
  j["model"] = r.model;
  j["topology"] = std::string(to_string(r.topology));
  j["reference"] = reference_to_json(r.reference, {});
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json x;
    x["path"] = c.path;
    x["against"] = c.reference;
    x["quantity"] = c.quantity;
    x["value"] = c.value;
    x["expected"] = c.expected;
    x["delta"] = c.delta;
    x["tolerance"] = c.tolerance;
    x["pass"] = c.pass;
    checks.push_back(x);
  }
  j["checks"] = checks;
  j["monte_carlo_exceedances"] = r.exceedances;
  j["allowed_exceedances"] = r.allowed_exceedances;
  j["passed"] = r.passed;
  j["version"] = version();
  return j;
}

std::string validation_to_table(const ValidationReport& r) {
  std::ostringstream out;
  out << "Validation of a " << r.model << " " << to_string(r.topology) << " model\n\n";
  out << pad("path", 24) << pad("against", 20) << pad("quantity", 20) << pad("delta", 14)
      << pad("tolerance", 14) << "result\n";
  for (const auto& c : r.checks)
    out << pad(c.path, 24) << pad(c.reference, 20) << pad(c.quantity, 20) << pad(fmt(c.delta, 3), 14)
        << pad(fmt(c.tolerance, 3), 14) << (c.pass ? "ok" : "EXCEEDS") << "\n";
  out << "\nMonte Carlo exceedances: " << r.exceedances << " (allowed " << r.allowed_exceedances
      << ")\n";
  out << (r.passed ? "PASSED" : "FAILED") << "\n";
  return out.str();
}

}  // namespace twomed::io
