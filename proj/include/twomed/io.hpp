#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "twomed/dataset.hpp"
#include "twomed/empirical.hpp"
#include "twomed/inference.hpp"
#include "twomed/linear_model.hpp"
#include "twomed/oracle.hpp"
#include "twomed/regression.hpp"
#include "twomed/simulate.hpp"
#include "twomed/types.hpp"

namespace twomed::io {

using Json = nlohmann::ordered_json;

std::string version();

enum class EstimatorKind { ClosedForm, EmpiricalCategorical };
enum class OutputFormat { Json, Table };

std::string_view to_string(EstimatorKind e);
std::string_view to_string(OutputFormat f);
EstimatorKind estimator_from_string(std::string_view s);
OutputFormat format_from_string(std::string_view s);

/// A reference level given either as a number or as "mean", meaning the
/// sample mean of the corresponding column of the analysis data.
struct Level {
  std::optional<double> value;  // empty means "mean"

  static Level mean() { return {}; }
  static Level of(double v) { return {v}; }
  bool is_mean() const { return !value.has_value(); }
};

/// Everything one CLI run needs. Built from defaults, then a JSON config file,
/// then command line flags, each layer overriding the previous one.
struct RunConfig {
  Topology topology = Topology::Sequential;

  std::string exposure = "A";
  std::string mediator1 = "M1";
  std::string mediator2 = "M2";
  std::string outcome = "Y";
  std::vector<std::string> covariates;
  std::vector<std::string> log_transform;  // natural log, applied after row drops

  double a = 1.0;
  double a_star = 0.0;
  Level m1_star = Level::mean();
  Level m2_star = Level::mean();
  // One entry per covariate; empty means every covariate at its mean.
  std::vector<Level> covariate_values;

  std::size_t bootstrap_b = 1000;  // 0 skips the bootstrap
  double level = 0.95;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  EstimatorKind estimator = EstimatorKind::ClosedForm;
  OutputFormat format = OutputFormat::Json;

  std::string data_path;
  std::string output_path;       // empty or "-" is stdout
  std::string dump_tables_path;  // empirical estimator only
};

/// Overlays the keys present in `j` onto `base`. Unknown keys and wrongly
/// typed values are ConfigErrors whose message starts with the key path.
RunConfig apply_config_json(const Json& j, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});
Json config_to_json(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// CSV

/// Reads a header-first CSV. Only the columns named by cfg are kept. A row
/// whose required fields are empty or not numbers is dropped and counted in
/// Dataset::dropped_rows. DataError for a missing column or when no row
/// survives. Columns listed in cfg.log_transform are replaced by their
/// natural log (DataError on a non-positive value) and renamed log(name).
Dataset read_csv(std::istream& in, const RunConfig& cfg, const std::string& source = "<stream>");
Dataset load_dataset(const std::string& path, const RunConfig& cfg);

/// Writes A, M1, M2, Y and covariates with round-trip precision.
void write_csv(std::ostream& out, const Dataset& d);

/// The number-to-text conversion used everywhere in the output: the shortest
/// decimal string that parses back to the same double.
std::string format_number(double x);

// ---------------------------------------------------------------------------
// Reference levels

/// Substitutes sample means for every "mean" token. The covariate vector is
/// ordered like d.covariate_names.
ReferenceConfig resolve_reference(const RunConfig& cfg, const Dataset& d);

// ---------------------------------------------------------------------------
// analyze

struct AnalysisReport {
  RunConfig config;
  ReferenceConfig reference;
  std::vector<std::string> covariate_names;
  std::string m1_label, m2_label;
  std::size_t n = 0;
  std::size_t dropped_rows = 0;
  ComponentSet point;
  std::optional<BootstrapResult> bootstrap;
  std::optional<FittedModels> models;  // closed-form estimator
  std::optional<ProbTables> tables;    // empirical estimator
};

AnalysisReport run_analyze(const RunConfig& cfg, const Dataset& d);

Json report_to_json(const AnalysisReport& r);
std::string report_to_table(const AnalysisReport& r);
Json tables_to_json(const ProbTables& t, const std::vector<std::string>& covariate_names = {});

// ---------------------------------------------------------------------------
// Structural model specs for simulate / validate

struct LinearSpec {
  LinearScm scm;
  SimulationDesign design;
  std::vector<std::string> covariate_names;  // C1..Ck unless named in the spec
};

struct BinarySpec {
  BinaryScm scm;
  double p_exposure = 0.5;
  double outcome_sd = 1.0;
};

struct ScmSpec {
  std::variant<LinearSpec, BinarySpec> model;
  Topology topology = Topology::Sequential;

  bool is_linear() const { return std::holds_alternative<LinearSpec>(model); }
};

/// Parses {"type": "linear" | "binary", ...}. Errors name the offending field,
/// e.g. "scm.theta[3]: expected a number".
ScmSpec parse_scm_spec(const Json& j);
ScmSpec load_scm_spec(const std::string& path);

Json component_set_to_json(const ComponentSet& cs);
Json reference_to_json(const ReferenceConfig& ref, const std::vector<std::string>& covariate_names);

// ---------------------------------------------------------------------------
// simulate

struct SimulationOutput {
  Dataset data;
  ReferenceConfig reference;
  Json truth;
};

/// Draws n rows and computes the ground truth at the reference resolved
/// against the simulated rows: exact enumeration (and the latent-uniform
/// average) for binary models; closed form plus, when mc_n > 0, Monte Carlo
/// for linear ones.
SimulationOutput run_simulate(const ScmSpec& spec, const RunConfig& cfg, std::size_t n,
                              std::size_t mc_n);

// ---------------------------------------------------------------------------
// validate

struct ValidationTolerances {
  double exact = 1e-12;         // relative, for the deterministic paths
  double sum_identity = 1e-10;  // relative, sum of components against TE
  double se_multiplier = 3.0;   // Monte Carlo band
  std::size_t max_exceedances = 0;
  std::size_t mc_n = 1'000'000;
};

struct ValidationCheck {
  std::string path;       // the path under test
  std::string reference;  // the path it is compared with
  std::string quantity;   // component or aggregate name
  double value = 0, expected = 0, delta = 0, tolerance = 0;
  bool pass = true;
};

struct ValidationReport {
  std::string model;  // "linear" or "binary"
  Topology topology = Topology::Sequential;
  ReferenceConfig reference;
  std::vector<ValidationCheck> checks;
  std::size_t exceedances = 0;
  std::size_t allowed_exceedances = 0;
  bool passed = true;
};

/// Runs every available computation path at the reference and compares them.
/// Linear: closed form, Monte Carlo within se_multiplier standard errors, and
/// nested counterfactual means (W1..W8). Binary: enumeration, latent-uniform
/// enumeration and, for the sequential topology, the plug-in sums on the true
/// tables.
ValidationReport run_validate(const ScmSpec& spec, const ReferenceConfig& reference,
                              const ValidationTolerances& tol, std::uint64_t seed);

Json validation_to_json(const ValidationReport& r);
std::string validation_to_table(const ValidationReport& r);

/// Reference levels for validate, where there are no data: "mean" tokens
/// resolve to population means under the model's exposure and covariate laws.
ReferenceConfig population_reference(const ScmSpec& spec, const RunConfig& cfg);

}  // namespace twomed::io
