#include "twomed/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#ifndef TWOMED_VERSION
#define TWOMED_VERSION "0.0.0"
#endif

namespace twomed::io {

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const Json* member(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) config_fail(path, "expected an object");
}

void reject_unknown_keys(const Json& j, const std::string& path,
                         std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) config_fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) config_fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) config_fail(path, "expected a finite number");
  return x;
}

std::uint64_t as_unsigned(const Json& v, const std::string& path) {
  if (!v.is_number_unsigned()) config_fail(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) config_fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> as_string_list(const Json& v, const std::string& path) {
  if (!v.is_array()) config_fail(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_string(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> as_vector(const Json& v, const std::string& path) {
  if (!v.is_array()) config_fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <std::size_t N>
std::array<double, N> as_array(const Json& v, const std::string& path) {
  const auto xs = as_vector(v, path);
  if (xs.size() != N)
    config_fail(path, "expected " + std::to_string(N) + " numbers, got " +
                          std::to_string(xs.size()));
  std::array<double, N> out{};
  std::copy(xs.begin(), xs.end(), out.begin());
  return out;
}

Level as_level(const Json& v, const std::string& path) {
  if (v.is_string()) {
    if (v.get<std::string>() == "mean") return Level::mean();
    config_fail(path, "expected a number or \"mean\"");
  }
  return Level::of(as_number(v, path));
}

Json level_to_json(const Level& l) { return l.is_mean() ? Json("mean") : Json(*l.value); }

template <class Fn>
auto rethrow_as_config(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    config_fail(path, e.what());
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<double> parse_field(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(x)) return std::nullopt;
  return x;
}

double law_mean(const VariableLaw& law) {
  return law.kind == VariableLaw::Kind::Bernoulli ? law.p : law.mean;
}

double law_second_moment(const VariableLaw& law) {
  if (law.kind == VariableLaw::Kind::Bernoulli) return law.p;
  return law.sd * law.sd + law.mean * law.mean;
}

VariableLaw parse_law(const Json& j, const std::string& path, std::string* name) {
  require_object(j, path);
  reject_unknown_keys(j, path, {"law", "p", "mean", "sd", "name"});
  VariableLaw law;
  const Json* kind = member(j, "law");
  if (!kind) config_fail(join(path, "law"), "missing (\"bernoulli\" or \"normal\")");
  const auto k = as_string(*kind, join(path, "law"));
  if (k == "bernoulli") {
    law.kind = VariableLaw::Kind::Bernoulli;
    if (const Json* p = member(j, "p")) law.p = as_number(*p, join(path, "p"));
  } else if (k == "normal") {
    law.kind = VariableLaw::Kind::Normal;
    if (const Json* m = member(j, "mean")) law.mean = as_number(*m, join(path, "mean"));
    if (const Json* s = member(j, "sd")) law.sd = as_number(*s, join(path, "sd"));
  } else {
    config_fail(join(path, "law"), "expected \"bernoulli\" or \"normal\", got \"" + k + "\"");
  }
  if (name) {
    if (const Json* n = member(j, "name")) *name = as_string(*n, join(path, "name"));
  }
  rethrow_as_config(path, [&] {
    law.validate(path);
    return 0;
  });
  return law;
}

LinearSpec parse_linear(const Json& j, Topology topology) {
  reject_unknown_keys(j, "scm",
                      {"type", "topology", "theta", "theta_c", "beta", "beta_c", "gamma",
                       "gamma_c", "sigma_y", "sigma_m1", "sigma_m2", "exposure", "covariates"});
  LinearSpec spec;
  auto& s = spec.scm;
  auto required = [&](const char* key) -> const Json& {
    const Json* v = member(j, key);
    if (!v) config_fail(join("scm", key), "missing");
    return *v;
  };
  s.theta = as_array<8>(required("theta"), "scm.theta");
  s.beta = as_array<4>(required("beta"), "scm.beta");
  s.gamma = as_array<2>(required("gamma"), "scm.gamma");
  if (const Json* v = member(j, "theta_c")) s.theta_c = as_vector(*v, "scm.theta_c");
  if (const Json* v = member(j, "beta_c")) s.beta_c = as_vector(*v, "scm.beta_c");
  if (const Json* v = member(j, "gamma_c")) s.gamma_c = as_vector(*v, "scm.gamma_c");
  const std::size_t k = s.theta_c.size();
  if (s.beta_c.size() != k) config_fail("scm.beta_c", "length differs from scm.theta_c");
  if (s.gamma_c.size() != k) config_fail("scm.gamma_c", "length differs from scm.theta_c");
  if (const Json* v = member(j, "sigma_y")) s.sigma_y = as_number(*v, "scm.sigma_y");
  if (const Json* v = member(j, "sigma_m1")) s.sigma_m1 = as_number(*v, "scm.sigma_m1");
  if (const Json* v = member(j, "sigma_m2")) s.sigma_m2 = as_number(*v, "scm.sigma_m2");
  rethrow_as_config("scm", [&] {
    s.validate();
    return 0;
  });
  if (topology == Topology::NonSequential && (s.beta[2] != 0.0 || s.beta[3] != 0.0))
    config_fail("scm.beta", "a non-sequential model needs beta[2] = beta[3] = 0");

  if (const Json* v = member(j, "exposure"))
    spec.design.exposure = parse_law(*v, "scm.exposure", nullptr);
  for (std::size_t i = 0; i < k; ++i) spec.covariate_names.push_back("C" + std::to_string(i + 1));
  if (const Json* v = member(j, "covariates")) {
    if (!v->is_array() || v->size() != k)
      config_fail("scm.covariates", "expected an array with one law per covariate (" +
                                        std::to_string(k) + ")");
    for (std::size_t i = 0; i < k; ++i)
      spec.design.covariates.push_back(parse_law((*v)[i],
                                                 "scm.covariates[" + std::to_string(i) + "]",
                                                 &spec.covariate_names[i]));
  } else {
    spec.design.covariates.assign(k, VariableLaw{VariableLaw::Kind::Normal, 0.5, 0.0, 1.0});
  }
  return spec;
}

BinarySpec parse_binary(const Json& j, Topology topology) {
  reject_unknown_keys(j, "scm",
                      {"type", "topology", "p_m1_given_a", "p_m2_given_a_m1", "e_y", "p_exposure",
                       "outcome_sd"});
  BinarySpec spec;
  auto& s = spec.scm;
  s.topology = topology;
  auto required = [&](const char* key) -> const Json& {
    const Json* v = member(j, key);
    if (!v) config_fail(join("scm", key), "missing");
    return *v;
  };
  s.p_m1_given_a = as_array<2>(required("p_m1_given_a"), "scm.p_m1_given_a");
  const Json& pm2 = required("p_m2_given_a_m1");
  if (!pm2.is_array() || pm2.size() != 2)
    config_fail("scm.p_m2_given_a_m1", "expected a 2 x 2 array indexed [a][m1]");
  for (std::size_t a = 0; a < 2; ++a)
    s.p_m2_given_a_m1[a] = as_array<2>(pm2[a], "scm.p_m2_given_a_m1[" + std::to_string(a) + "]");
  const Json& ey = required("e_y");
  if (!ey.is_array() || ey.size() != 2)
    config_fail("scm.e_y", "expected a 2 x 2 x 2 array indexed [a][m1][m2]");
  for (std::size_t a = 0; a < 2; ++a) {
    const std::string pa = "scm.e_y[" + std::to_string(a) + "]";
    if (!ey[a].is_array() || ey[a].size() != 2) config_fail(pa, "expected a 2 x 2 array");
    for (std::size_t m1 = 0; m1 < 2; ++m1)
      s.e_y[a][m1] = as_array<2>(ey[a][m1], pa + "[" + std::to_string(m1) + "]");
  }
  if (const Json* v = member(j, "p_exposure")) spec.p_exposure = as_number(*v, "scm.p_exposure");
  if (const Json* v = member(j, "outcome_sd")) spec.outcome_sd = as_number(*v, "scm.outcome_sd");
  if (!(spec.p_exposure >= 0.0 && spec.p_exposure <= 1.0))
    config_fail("scm.p_exposure", "must lie in [0, 1]");
  if (!(spec.outcome_sd >= 0.0)) config_fail("scm.outcome_sd", "must be non-negative");
  rethrow_as_config("scm", [&] {
    s.validate();
    return 0;
  });
  return spec;
}

Json parse_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + " '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string(what) + " '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

std::string version() { return TWOMED_VERSION; }

std::string_view to_string(EstimatorKind e) {
  return e == EstimatorKind::ClosedForm ? "closed-form" : "empirical-categorical";
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::Json ? "json" : "table"; }

EstimatorKind estimator_from_string(std::string_view s) {
  if (s == "closed-form") return EstimatorKind::ClosedForm;
  if (s == "empirical-categorical") return EstimatorKind::EmpiricalCategorical;
  throw ConfigError("unknown estimator '" + std::string(s) +
                    "' (expected 'closed-form' or 'empirical-categorical')");
}

OutputFormat format_from_string(std::string_view s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "table") return OutputFormat::Table;
  throw ConfigError("unknown output format '" + std::string(s) + "' (expected 'json' or 'table')");
}

RunConfig apply_config_json(const Json& j, RunConfig cfg) {
  require_object(j, "config");
  reject_unknown_keys(j, "", {"topology", "columns", "log_transform", "reference", "bootstrap",
                              "estimator", "output", "data"});

  if (const Json* v = member(j, "topology"))
    cfg.topology = rethrow_as_config("topology", [&] {
      return topology_from_string(as_string(*v, "topology"));
    });
  if (const Json* v = member(j, "data")) cfg.data_path = as_string(*v, "data");
  if (const Json* v = member(j, "estimator"))
    cfg.estimator = rethrow_as_config("estimator", [&] {
      return estimator_from_string(as_string(*v, "estimator"));
    });
  if (const Json* v = member(j, "log_transform"))
    cfg.log_transform = as_string_list(*v, "log_transform");

  if (const Json* cols = member(j, "columns")) {
    require_object(*cols, "columns");
    reject_unknown_keys(*cols, "columns",
                        {"exposure", "mediator1", "mediator2", "outcome", "covariates"});
    if (const Json* v = member(*cols, "exposure")) cfg.exposure = as_string(*v, "columns.exposure");
    if (const Json* v = member(*cols, "mediator1"))
      cfg.mediator1 = as_string(*v, "columns.mediator1");
    if (const Json* v = member(*cols, "mediator2"))
      cfg.mediator2 = as_string(*v, "columns.mediator2");
    if (const Json* v = member(*cols, "outcome")) cfg.outcome = as_string(*v, "columns.outcome");
    if (const Json* v = member(*cols, "covariates")) {
      cfg.covariates = as_string_list(*v, "columns.covariates");
      cfg.covariate_values.clear();
    }
  }

  if (const Json* ref = member(j, "reference")) {
    require_object(*ref, "reference");
    reject_unknown_keys(*ref, "reference", {"a", "a_star", "m1_star", "m2_star", "covariates"});
    if (const Json* v = member(*ref, "a")) cfg.a = as_number(*v, "reference.a");
    if (const Json* v = member(*ref, "a_star")) cfg.a_star = as_number(*v, "reference.a_star");
    if (const Json* v = member(*ref, "m1_star")) cfg.m1_star = as_level(*v, "reference.m1_star");
    if (const Json* v = member(*ref, "m2_star")) cfg.m2_star = as_level(*v, "reference.m2_star");
    if (const Json* v = member(*ref, "covariates")) {
      const std::string path = "reference.covariates";
      cfg.covariate_values.clear();
      if (v->is_string()) {
        if (v->get<std::string>() != "mean") config_fail(path, "expected \"mean\", array or object");
      } else if (v->is_array()) {
        if (v->size() != cfg.covariates.size())
          config_fail(path, "has " + std::to_string(v->size()) + " entries for " +
                                std::to_string(cfg.covariates.size()) + " covariate columns");
        for (std::size_t i = 0; i < v->size(); ++i)
          cfg.covariate_values.push_back(as_level((*v)[i], path + "[" + std::to_string(i) + "]"));
      } else if (v->is_object()) {
        cfg.covariate_values.assign(cfg.covariates.size(), Level::mean());
        for (const auto& [name, value] : v->items()) {
          auto it = std::find(cfg.covariates.begin(), cfg.covariates.end(), name);
          if (it == cfg.covariates.end())
            config_fail(path + "." + name, "not one of columns.covariates");
          cfg.covariate_values[static_cast<std::size_t>(it - cfg.covariates.begin())] =
              as_level(value, path + "." + name);
        }
      } else {
        config_fail(path, "expected \"mean\", array or object");
      }
    }
  }

  if (const Json* boot = member(j, "bootstrap")) {
    require_object(*boot, "bootstrap");
    reject_unknown_keys(*boot, "bootstrap", {"B", "level", "seed", "threads"});
    if (const Json* v = member(*boot, "B")) cfg.bootstrap_b = as_unsigned(*v, "bootstrap.B");
    if (const Json* v = member(*boot, "level")) cfg.level = as_number(*v, "bootstrap.level");
    if (const Json* v = member(*boot, "seed")) cfg.seed = as_unsigned(*v, "bootstrap.seed");
    if (const Json* v = member(*boot, "threads"))
      cfg.threads = static_cast<unsigned>(as_unsigned(*v, "bootstrap.threads"));
  }

  if (const Json* out = member(j, "output")) {
    require_object(*out, "output");
    reject_unknown_keys(*out, "output", {"format", "path", "dump_tables"});
    if (const Json* v = member(*out, "format"))
      cfg.format = rethrow_as_config("output.format", [&] {
        return format_from_string(as_string(*v, "output.format"));
      });
    if (const Json* v = member(*out, "path")) cfg.output_path = as_string(*v, "output.path");
    if (const Json* v = member(*out, "dump_tables"))
      cfg.dump_tables_path = as_string(*v, "output.dump_tables");
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  const Json j = parse_json_file(path, "config file");
  RunConfig cfg = apply_config_json(j, std::move(base));
  // Relative paths inside a config file are relative to that file.
  const auto dir = std::filesystem::path(path).parent_path();
  auto anchor = [&](std::string& p) {
    if (!p.empty() && p != "-" && std::filesystem::path(p).is_relative() && !dir.empty())
      p = (dir / p).lexically_normal().string();
  };
  if (member(j, "data")) anchor(cfg.data_path);
  if (const Json* out = member(j, "output")) {
    if (member(*out, "path")) anchor(cfg.output_path);
    if (member(*out, "dump_tables")) anchor(cfg.dump_tables_path);
  }
  return cfg;
}

Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["topology"] = std::string(to_string(cfg.topology));
  j["data"] = cfg.data_path;
  j["estimator"] = std::string(to_string(cfg.estimator));
  j["columns"] = {{"exposure", cfg.exposure},
                  {"mediator1", cfg.mediator1},
                  {"mediator2", cfg.mediator2},
                  {"outcome", cfg.outcome},
                  {"covariates", cfg.covariates}};
  j["log_transform"] = cfg.log_transform;
  Json ref;
  ref["a"] = cfg.a;
  ref["a_star"] = cfg.a_star;
  ref["m1_star"] = level_to_json(cfg.m1_star);
  ref["m2_star"] = level_to_json(cfg.m2_star);
  if (cfg.covariate_values.empty()) {
    ref["covariates"] = "mean";
  } else {
    Json cov = Json::array();
    for (const auto& l : cfg.covariate_values) cov.push_back(level_to_json(l));
    ref["covariates"] = cov;
  }
  j["reference"] = ref;
  j["bootstrap"] = {{"B", cfg.bootstrap_b},
                    {"level", cfg.level},
                    {"seed", cfg.seed},
                    {"threads", cfg.threads}};
  j["output"] = {{"format", std::string(to_string(cfg.format))},
                 {"path", cfg.output_path},
                 {"dump_tables", cfg.dump_tables_path}};
  return j;
}

// ---------------------------------------------------------------------------

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

Dataset read_csv(std::istream& in, const RunConfig& cfg, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file, expected a header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> header;
  for (auto f : split_line(line)) header.push_back(unquote(f));

  std::vector<std::string> wanted = {cfg.exposure, cfg.mediator1, cfg.mediator2, cfg.outcome};
  wanted.insert(wanted.end(), cfg.covariates.begin(), cfg.covariates.end());
  std::vector<std::size_t> col(wanted.size());
  for (std::size_t i = 0; i < wanted.size(); ++i) {
    const auto first = std::find(header.begin(), header.end(), wanted[i]);
    if (first == header.end()) throw DataError(source + ": no column named '" + wanted[i] + "'");
    if (std::find(first + 1, header.end(), wanted[i]) != header.end())
      throw DataError(source + ": column '" + wanted[i] + "' appears more than once");
    col[i] = static_cast<std::size_t>(first - header.begin());
  }
  for (const auto& name : cfg.log_transform)
    if (std::find(wanted.begin(), wanted.end(), name) == wanted.end())
      throw ConfigError("log_transform: '" + name + "' is not one of the analysis columns");

  std::vector<std::vector<double>> rows;
  std::size_t dropped = 0;
  std::vector<double> values(wanted.size());
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_line(line);
    bool ok = true;
    for (std::size_t i = 0; i < wanted.size() && ok; ++i) {
      const auto v = col[i] < fields.size() ? parse_field(fields[col[i]]) : std::nullopt;
      if (v) values[i] = *v;
      else ok = false;
    }
    if (ok) rows.push_back(values);
    else ++dropped;
  }
  if (rows.empty())
    throw DataError(source + ": no usable rows (" + std::to_string(dropped) + " dropped)");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(cfg.covariates.size());
  Dataset d;
  d.a.resize(n);
  d.m1.resize(n);
  d.m2.resize(n);
  d.y.resize(n);
  d.covariates.resize(n, k);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& v = rows[static_cast<std::size_t>(r)];
    d.a[r] = v[0];
    d.m1[r] = v[1];
    d.m2[r] = v[2];
    d.y[r] = v[3];
    for (Eigen::Index c = 0; c < k; ++c) d.covariates(r, c) = v[4 + static_cast<std::size_t>(c)];
  }
  d.a_name = cfg.exposure;
  d.m1_name = cfg.mediator1;
  d.m2_name = cfg.mediator2;
  d.y_name = cfg.outcome;
  d.covariate_names = cfg.covariates;
  d.dropped_rows = dropped;

  auto log_column = [&](auto&& column, std::string& name) {
    for (Eigen::Index r = 0; r < n; ++r) {
      if (!(column(r) > 0.0))
        throw DataError(source + ": cannot log-transform column '" + name + "', value " +
                        format_number(column(r)) + " is not positive");
      column(r) = std::log(column(r));
    }
    name = "log(" + name + ")";
  };
  for (const auto& name : cfg.log_transform) {
    if (name == cfg.exposure) log_column([&](Eigen::Index r) -> double& { return d.a[r]; }, d.a_name);
    else if (name == cfg.mediator1)
      log_column([&](Eigen::Index r) -> double& { return d.m1[r]; }, d.m1_name);
    else if (name == cfg.mediator2)
      log_column([&](Eigen::Index r) -> double& { return d.m2[r]; }, d.m2_name);
    else if (name == cfg.outcome)
      log_column([&](Eigen::Index r) -> double& { return d.y[r]; }, d.y_name);
    else {
      const auto j = static_cast<Eigen::Index>(
          std::find(cfg.covariates.begin(), cfg.covariates.end(), name) - cfg.covariates.begin());
      log_column([&](Eigen::Index r) -> double& { return d.covariates(r, j); },
                 d.covariate_names[static_cast<std::size_t>(j)]);
    }
  }
  d.validate();
  return d;
}

Dataset load_dataset(const std::string& path, const RunConfig& cfg) {
  if (path.empty()) throw ConfigError("no data file given (--data or \"data\" in the config)");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return read_csv(in, cfg, path);
}

void write_csv(std::ostream& out, const Dataset& d) {
  out << d.a_name << ',' << d.m1_name << ',' << d.m2_name << ',' << d.y_name;
  for (const auto& c : d.covariate_names) out << ',' << c;
  out << '\n';
  for (Eigen::Index r = 0; r < d.a.size(); ++r) {
    out << format_number(d.a[r]) << ',' << format_number(d.m1[r]) << ','
        << format_number(d.m2[r]) << ',' << format_number(d.y[r]);
    for (Eigen::Index c = 0; c < d.covariates.cols(); ++c)
      out << ',' << format_number(d.covariates(r, c));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

ReferenceConfig resolve_reference(const RunConfig& cfg, const Dataset& d) {
  ReferenceConfig ref;
  ref.topology = cfg.topology;
  ref.a = cfg.a;
  ref.a_star = cfg.a_star;
  ref.m1_star = cfg.m1_star.is_mean() ? d.m1.mean() : *cfg.m1_star.value;
  ref.m2_star = cfg.m2_star.is_mean() ? d.m2.mean() : *cfg.m2_star.value;
  const auto means = d.covariate_means();
  if (!cfg.covariate_values.empty() && cfg.covariate_values.size() != d.k())
    throw ConfigError("reference.covariates: " + std::to_string(cfg.covariate_values.size()) +
                      " values for " + std::to_string(d.k()) + " covariate columns");
  ref.covariates.resize(d.k());
  for (std::size_t j = 0; j < d.k(); ++j) {
    const bool use_mean = cfg.covariate_values.empty() || cfg.covariate_values[j].is_mean();
    ref.covariates[j] = use_mean ? means[j] : *cfg.covariate_values[j].value;
  }
  return ref;
}

ReferenceConfig population_reference(const ScmSpec& spec, const RunConfig& cfg) {
  ReferenceConfig ref;
  ref.topology = spec.topology;
  ref.a = cfg.a;
  ref.a_star = cfg.a_star;
  if (const auto* lin = std::get_if<LinearSpec>(&spec.model)) {
    const auto& s = lin->scm;
    const auto& laws = lin->design.covariates;
    const std::size_t k = s.covariate_dim();
    if (!cfg.covariate_values.empty() && cfg.covariate_values.size() != k)
      throw ConfigError("reference.covariates: " + std::to_string(cfg.covariate_values.size()) +
                        " values for a model with " + std::to_string(k) + " covariates");
    std::vector<double> cov_mean(k);
    ref.covariates.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      cov_mean[j] = law_mean(laws[j]);
      const bool use_mean = cfg.covariate_values.empty() || cfg.covariate_values[j].is_mean();
      ref.covariates[j] = use_mean ? cov_mean[j] : *cfg.covariate_values[j].value;
    }
    // Population means under independent exposure and covariates.
    const double ea = law_mean(lin->design.exposure);
    const double ea2 = law_second_moment(lin->design.exposure);
    const double gc = dot(s.gamma_c, cov_mean);
    const double em1 = s.gamma[0] + s.gamma[1] * ea + gc;
    const double ea_m1 = s.gamma[0] * ea + s.gamma[1] * ea2 + ea * gc;
    const double em2 =
        s.beta[0] + s.beta[1] * ea + s.beta[2] * em1 + s.beta[3] * ea_m1 + dot(s.beta_c, cov_mean);
    ref.m1_star = cfg.m1_star.is_mean() ? em1 : *cfg.m1_star.value;
    ref.m2_star = cfg.m2_star.is_mean() ? em2 : *cfg.m2_star.value;
  } else {
    const auto& b = std::get<BinarySpec>(spec.model);
    if (!cfg.covariate_values.empty())
      throw ConfigError("reference.covariates: binary models have no covariates");
    const double pa = b.p_exposure;
    const auto& p1 = b.scm.p_m1_given_a;
    const auto& p2 = b.scm.p_m2_given_a_m1;
    const double em1 = (1 - pa) * p1[0] + pa * p1[1];
    double em2 = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int m1 = 0; m1 < 2; ++m1)
        em2 += (a ? pa : 1 - pa) * (m1 ? p1[a] : 1 - p1[a]) * p2[a][m1];
    ref.m1_star = cfg.m1_star.is_mean() ? em1 : *cfg.m1_star.value;
    ref.m2_star = cfg.m2_star.is_mean() ? em2 : *cfg.m2_star.value;
  }
  return ref;
}

// ---------------------------------------------------------------------------

ScmSpec parse_scm_spec(const Json& j) {
  require_object(j, "scm");
  ScmSpec spec;
  const Json* type = member(j, "type");
  if (!type) config_fail("scm.type", "missing (\"linear\" or \"binary\")");
  const auto t = as_string(*type, "scm.type");
  if (const Json* v = member(j, "topology"))
    spec.topology = rethrow_as_config("scm.topology", [&] {
      return topology_from_string(as_string(*v, "scm.topology"));
    });
  if (t == "linear") spec.model = parse_linear(j, spec.topology);
  else if (t == "binary") spec.model = parse_binary(j, spec.topology);
  else config_fail("scm.type", "expected \"linear\" or \"binary\", got \"" + t + "\"");
  return spec;
}

ScmSpec load_scm_spec(const std::string& path) {
  return parse_scm_spec(parse_json_file(path, "model spec"));
}

}  // namespace twomed::io
