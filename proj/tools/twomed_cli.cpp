#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "twomed/io.hpp"

namespace {

using namespace twomed;
using twomed::io::Json;

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kEstimation = 4, kValidation = 5 };

// Command line values kept apart from RunConfig so that only flags the user
// actually typed override the config file.
struct Flags {
  std::string config, topology, estimator, format, output, data, dump_tables;
  std::string exposure, mediator1, mediator2, outcome;
  std::vector<std::string> covariates, log_transform, covariate_values;
  std::string m1_star, m2_star;
  double a = 0, a_star = 0, level = 0;
  std::size_t bootstrap_b = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  std::string scm, truth;
  std::size_t n = 0, mc_n = 0, max_exceedances = 0;
  double se_multiplier = 3.0, tol = 1e-12;
};

io::Level parse_level(const std::string& s, const std::string& flag) {
  if (s == "mean") return io::Level::mean();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return io::Level::of(v);
  } catch (const std::exception&) {
  }
  throw ConfigError(flag + ": expected a number or 'mean', got '" + s + "'");
}

bool given(CLI::App* app, const std::string& name) {
  const auto* opt = app->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

io::RunConfig build_config(CLI::App* app, const Flags& f) {
  io::RunConfig cfg;
  if (!f.config.empty()) cfg = io::load_config_file(f.config);
  if (given(app, "--topology")) cfg.topology = topology_from_string(f.topology);
  if (given(app, "--estimator")) cfg.estimator = io::estimator_from_string(f.estimator);
  if (given(app, "--format")) cfg.format = io::format_from_string(f.format);
  if (given(app, "--output")) cfg.output_path = f.output;
  if (given(app, "--data")) cfg.data_path = f.data;
  if (given(app, "--dump-tables")) cfg.dump_tables_path = f.dump_tables;
  if (given(app, "--exposure")) cfg.exposure = f.exposure;
  if (given(app, "--mediator1")) cfg.mediator1 = f.mediator1;
  if (given(app, "--mediator2")) cfg.mediator2 = f.mediator2;
  if (given(app, "--outcome")) cfg.outcome = f.outcome;
  if (given(app, "--covariates")) {
    cfg.covariates = f.covariates;
    cfg.covariate_values.clear();
  }
  if (given(app, "--log-transform")) cfg.log_transform = f.log_transform;
  if (given(app, "--a")) cfg.a = f.a;
  if (given(app, "--a-star")) cfg.a_star = f.a_star;
  if (given(app, "--m1-star")) cfg.m1_star = parse_level(f.m1_star, "--m1-star");
  if (given(app, "--m2-star")) cfg.m2_star = parse_level(f.m2_star, "--m2-star");
  if (given(app, "--covariate-values")) {
    cfg.covariate_values.clear();
    for (const auto& v : f.covariate_values)
      cfg.covariate_values.push_back(parse_level(v, "--covariate-values"));
  }
  if (given(app, "--bootstrap-B")) cfg.bootstrap_b = f.bootstrap_b;
  if (given(app, "--level")) cfg.level = f.level;
  if (given(app, "--seed")) cfg.seed = f.seed;
  if (given(app, "--threads")) cfg.threads = f.threads;
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

void add_reference_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration; flags override its keys");
  sub->add_option("--topology", f.topology, "sequential | non-sequential");
  sub->add_option("--a", f.a, "Exposure level a");
  sub->add_option("--a-star", f.a_star, "Reference exposure level a*");
  sub->add_option("--m1-star", f.m1_star, "Reference level of M1 (number or 'mean')");
  sub->add_option("--m2-star", f.m2_star, "Reference level of M2 (number or 'mean')");
  sub->add_option("--covariate-values", f.covariate_values,
                  "Covariate conditioning values, one per covariate (number or 'mean')");
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_option("--threads", f.threads, "Worker threads (0 = hardware concurrency)");
  sub->add_option("--format", f.format, "json | table");
  sub->add_option("--output", f.output, "Output file ('-' for stdout)");
}

int run_analyze(CLI::App* app, const Flags& f) {
  const auto cfg = build_config(app, f);
  if (!cfg.dump_tables_path.empty() && cfg.estimator != io::EstimatorKind::EmpiricalCategorical)
    throw ConfigError("--dump-tables needs the empirical-categorical estimator");
  const auto data = io::load_dataset(cfg.data_path, cfg);
  const auto report = io::run_analyze(cfg, data);
  if (report.tables && !cfg.dump_tables_path.empty())
    write_text(cfg.dump_tables_path,
               json_text(io::tables_to_json(*report.tables, report.covariate_names)));
  write_text(cfg.output_path, cfg.format == io::OutputFormat::Json
                                  ? json_text(io::report_to_json(report))
                                  : io::report_to_table(report));
  return kOk;
}

int run_simulate(CLI::App* app, const Flags& f) {
  const auto cfg = build_config(app, f);
  const auto spec = io::load_scm_spec(f.scm);
  const auto out = io::run_simulate(spec, cfg, f.n, f.mc_n);
  std::ostringstream csv;
  io::write_csv(csv, out.data);
  write_text(cfg.output_path, csv.str());
  if (!f.truth.empty()) write_text(f.truth, json_text(out.truth));
  else std::cerr << json_text(out.truth);
  return kOk;
}

int run_validate(CLI::App* app, const Flags& f) {
  const auto cfg = build_config(app, f);
  const auto spec = io::load_scm_spec(f.scm);
  io::ValidationTolerances tol;
  tol.exact = f.tol;
  tol.se_multiplier = f.se_multiplier;
  tol.max_exceedances = f.max_exceedances;
  tol.mc_n = f.mc_n;
  const auto report = io::run_validate(spec, io::population_reference(spec, cfg), tol, cfg.seed);
  write_text(cfg.output_path, cfg.format == io::OutputFormat::Json
                                  ? json_text(io::validation_to_json(report))
                                  : io::validation_to_table(report));
  return report.passed ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decomposition of a total effect through two mediators"};
  app.set_version_flag("--version", twomed::io::version());
  app.require_subcommand(1);
  Flags f;

  auto* analyze = app.add_subcommand("analyze", "Estimate the decomposition from a CSV file");
  add_reference_flags(analyze, f);
  analyze->add_option("--data", f.data, "Input CSV with a header row");
  analyze->add_option("--estimator", f.estimator, "closed-form | empirical-categorical");
  analyze->add_option("--bootstrap-B", f.bootstrap_b, "Bootstrap replicates (0 skips intervals)");
  analyze->add_option("--level", f.level, "Confidence level");
  analyze->add_option("--dump-tables", f.dump_tables,
                      "Write the estimated probability tables as JSON");
  analyze->add_option("--exposure", f.exposure, "Exposure column");
  analyze->add_option("--mediator1", f.mediator1, "First mediator column");
  analyze->add_option("--mediator2", f.mediator2, "Second mediator column");
  analyze->add_option("--outcome", f.outcome, "Outcome column");
  analyze->add_option("--covariates", f.covariates, "Covariate columns");
  analyze->add_option("--log-transform", f.log_transform, "Columns to replace by their log");

  auto* simulate = app.add_subcommand("simulate", "Draw a dataset and its ground truth");
  add_reference_flags(simulate, f);
  simulate->add_option("--scm", f.scm, "Structural model spec (JSON)")->required();
  simulate->add_option("--n", f.n, "Rows to draw")->required();
  simulate->add_option("--mc-n", f.mc_n, "Monte Carlo draws for the linear ground truth");
  simulate->add_option("--truth", f.truth, "Ground-truth JSON file (default: stderr)");

  auto* validate = app.add_subcommand("validate", "Cross-check the computation paths");
  add_reference_flags(validate, f);
  f.mc_n = 1'000'000;
  validate->add_option("--scm", f.scm, "Structural model spec (JSON)")->required();
  validate->add_option("--mc-n", f.mc_n, "Monte Carlo draws (linear models, 0 skips)")
      ->capture_default_str();
  validate->add_option("--se-multiplier", f.se_multiplier, "Monte Carlo band in standard errors")
      ->capture_default_str();
  validate->add_option("--max-exceedances", f.max_exceedances,
                       "Monte Carlo checks allowed outside the band")
      ->capture_default_str();
  validate->add_option("--tol", f.tol, "Relative tolerance for the exact paths")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (analyze->parsed()) return run_analyze(analyze, f);
    if (simulate->parsed()) {
      // simulate writes no Monte Carlo truth unless asked.
      if (!given(simulate, "--mc-n")) f.mc_n = 0;
      return run_simulate(simulate, f);
    }
    return run_validate(validate, f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const StructuralError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const EstimationError& e) {
    std::cerr << "estimation error: " << e.what() << "\n";
    return kEstimation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
