#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "twomed/closed_form.hpp"
#include "twomed/io.hpp"

namespace py = pybind11;
using namespace twomed;
using io::Json;

namespace {

// The Python layer passes structured arguments as JSON text and receives JSON
// text back; twomed/__init__.py does the dict conversion.

double number(const Json& j, const char* key, double fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw ConfigError(std::string(key) + ": expected a number");
  return it->get<double>();
}

std::vector<double> numbers(const Json& j, const char* key) {
  std::vector<double> out;
  auto it = j.find(key);
  if (it == j.end()) return out;
  if (!it->is_array()) throw ConfigError(std::string(key) + ": expected a list of numbers");
  for (const auto& v : *it) {
    if (!v.is_number()) throw ConfigError(std::string(key) + ": expected a list of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

template <std::size_t N>
std::array<double, N> fixed(const Json& j, const char* key) {
  const auto v = numbers(j, key);
  if (v.size() != N)
    throw ConfigError(std::string(key) + ": expected " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

ReferenceConfig reference_from(const std::string& text) {
  const auto j = Json::parse(text);
  ReferenceConfig r;
  r.a = number(j, "a", 1.0);
  r.a_star = number(j, "a_star", 0.0);
  r.m1_star = number(j, "m1_star", 0.0);
  r.m2_star = number(j, "m2_star", 0.0);
  r.covariates = numbers(j, "covariates");
  if (auto it = j.find("topology"); it != j.end())
    r.topology = topology_from_string(it->get<std::string>());
  return r;
}

ModelCoefficients coefficients_from(const std::string& text) {
  const auto j = Json::parse(text);
  ModelCoefficients m;
  m.theta = fixed<8>(j, "theta");
  m.beta = fixed<4>(j, "beta");
  m.gamma = fixed<2>(j, "gamma");
  m.theta_c = numbers(j, "theta_c");
  m.beta_c = numbers(j, "beta_c");
  m.gamma_c = numbers(j, "gamma_c");
  m.sigma_m1 = number(j, "sigma_m1", 1.0);
  return m;
}

Dataset dataset_from(const Eigen::VectorXd& a, const Eigen::VectorXd& m1,
                     const Eigen::VectorXd& m2, const Eigen::VectorXd& y,
                     const std::optional<Eigen::MatrixXd>& covariates,
                     const std::vector<std::string>& covariate_names) {
  Dataset d;
  d.a = a;
  d.m1 = m1;
  d.m2 = m2;
  d.y = y;
  d.covariates = covariates ? *covariates : Eigen::MatrixXd(a.size(), 0);
  d.covariate_names = covariate_names;
  if (d.covariate_names.empty())
    for (Eigen::Index j = 0; j < d.covariates.cols(); ++j)
      d.covariate_names.push_back("C" + std::to_string(j + 1));
  d.validate();
  return d;
}

std::string dump(const Json& j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_twomed, m) {
  m.doc() = "Two-mediator decomposition of a total effect (compiled core)";

  auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<EstimationError>(m, "EstimationError", base.ptr());
  py::register_exception<StructuralError>(m, "StructuralError", base.ptr());

  m.def("version", &io::version);

  m.def(
      "closed_form",
      [](const std::string& coefficients, const std::string& reference) {
        return dump(io::component_set_to_json(
            decompose_closed_form(coefficients_from(coefficients), reference_from(reference))));
      },
      py::arg("coefficients"), py::arg("reference"));

  m.def(
      "total_effect_polynomial",
      [](const std::string& coefficients, const std::string& reference) {
        return total_effect_polynomial(coefficients_from(coefficients), reference_from(reference));
      },
      py::arg("coefficients"), py::arg("reference"));

  m.def(
      "analyze",
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& m1, const Eigen::VectorXd& m2,
         const Eigen::VectorXd& y, const std::optional<Eigen::MatrixXd>& covariates,
         const std::vector<std::string>& covariate_names, const std::string& config) {
        auto cfg = io::apply_config_json(Json::parse(config));
        const auto d = dataset_from(a, m1, m2, y, covariates, covariate_names);
        cfg.covariates = d.covariate_names;
        py::gil_scoped_release release;
        return dump(io::report_to_json(io::run_analyze(cfg, d)));
      },
      py::arg("a"), py::arg("m1"), py::arg("m2"), py::arg("y"), py::arg("covariates") = py::none(),
      py::arg("covariate_names") = std::vector<std::string>{}, py::arg("config") = "{}");

  m.def(
      "analyze_csv",
      [](const std::string& path, const std::string& config) {
        const auto cfg = io::apply_config_json(Json::parse(config));
        const auto d = io::load_dataset(path, cfg);
        py::gil_scoped_release release;
        return dump(io::report_to_json(io::run_analyze(cfg, d)));
      },
      py::arg("path"), py::arg("config") = "{}");

  m.def(
      "simulate",
      [](const std::string& spec, const std::string& config, std::size_t n, std::size_t mc_n) {
        const auto s = io::parse_scm_spec(Json::parse(spec));
        const auto cfg = io::apply_config_json(Json::parse(config));
        const auto out = io::run_simulate(s, cfg, n, mc_n);
        py::dict columns;
        columns[py::str(out.data.a_name)] = out.data.a;
        columns[py::str(out.data.m1_name)] = out.data.m1;
        columns[py::str(out.data.m2_name)] = out.data.m2;
        columns[py::str(out.data.y_name)] = out.data.y;
        for (std::size_t j = 0; j < out.data.k(); ++j)
          columns[py::str(out.data.covariate_names[j])] =
              Eigen::VectorXd(out.data.covariates.col(static_cast<Eigen::Index>(j)));
        return py::make_tuple(columns, dump(out.truth));
      },
      py::arg("spec"), py::arg("config") = "{}", py::arg("n") = 1000, py::arg("mc_n") = 0);

  m.def(
      "validate",
      [](const std::string& spec, const std::string& config, double tol, double se_multiplier,
         std::size_t max_exceedances, std::size_t mc_n) {
        const auto s = io::parse_scm_spec(Json::parse(spec));
        const auto cfg = io::apply_config_json(Json::parse(config));
        io::ValidationTolerances t;
        t.exact = tol;
        t.se_multiplier = se_multiplier;
        t.max_exceedances = max_exceedances;
        t.mc_n = mc_n;
        py::gil_scoped_release release;
        return dump(io::validation_to_json(
            io::run_validate(s, io::population_reference(s, cfg), t, cfg.seed)));
      },
      py::arg("spec"), py::arg("config") = "{}", py::arg("tol") = 1e-12,
      py::arg("se_multiplier") = 3.0, py::arg("max_exceedances") = 0,
      py::arg("mc_n") = 1'000'000);
}
