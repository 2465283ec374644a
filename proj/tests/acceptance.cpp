// Acceptance run: prints one PASS/FAIL line per criterion.
//
// Exit status is 0 when every gating criterion ends as listed in main(). One
// criterion is listed as an expected FAIL: the sequential NatINT_M1M2 does not
// vanish when the outcome model has no interactions, because the A x M1 term
// of the M2 model still feeds it (it equals theta3 * beta3 * gamma1 * (a - a*)^2).
// The line still reads FAIL; a surprise PASS would also fail the run.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "support.hpp"
#include "tables.hpp"
#include "twomed/closed_form.hpp"
#include "twomed/empirical.hpp"
#include "twomed/inference.hpp"
#include "twomed/oracle.hpp"
#include "twomed/regression.hpp"
#include "twomed/simulate.hpp"

using namespace twomed;
using namespace testsupport;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  bool expect_pass;
  bool gating;
  std::function<Result()> run;
};

double rel_gap(double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); }

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::size_t random_k(std::mt19937_64& rng) {
  return static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 3)(rng));
}

// --- 1 and 2 -------------------------------------------------------------

Result sum_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  std::size_t failures = 0;
  for (auto topo : {Topology::Sequential, Topology::NonSequential}) {
    for (int i = 0; i < 1000; ++i) {
      const std::size_t k = random_k(rng);
      const auto scm = random_linear_scm(rng, k, topo == Topology::Sequential);
      const auto cfg = random_config(rng, k, topo);
      const auto cs = decompose_closed_form(scm.coefficients(), cfg);
      const double gap = rel_gap(total_from_components(cs), cs[AggregateName::Te]);
      worst = std::max(worst, gap);
      if (gap > 1e-10) ++failures;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {failures == 0 && secs < 5.0, "2000 instances, worst relative gap " + num(worst) +
                                           ", " + num(secs) + " s (limit 5 s)"};
}

Result te_double_path() {
  std::mt19937_64 rng(101);  // the instances of criterion 1
  double worst = 0.0;
  std::size_t failures = 0;
  for (auto topo : {Topology::Sequential, Topology::NonSequential}) {
    for (int i = 0; i < 1000; ++i) {
      const std::size_t k = random_k(rng);
      const auto scm = random_linear_scm(rng, k, topo == Topology::Sequential);
      const auto cfg = random_config(rng, k, topo);
      const auto m = scm.coefficients();
      const double poly = total_effect_polynomial(m, cfg);
      const double nested = expected_counterfactual(NestedCounterfactual::W1, m, cfg) -
                            expected_counterfactual(NestedCounterfactual::W8, m, cfg);
      const double gap = rel_gap(poly, nested);
      worst = std::max(worst, gap);
      if (gap > 1e-12) ++failures;
    }
  }
  return {failures == 0, "2000 instances, worst relative gap " + num(worst) + " (limit 1e-12), " +
                             std::to_string(failures) + " over"};
}

// --- 3 -------------------------------------------------------------------

Result binary_triangle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(303);
  std::bernoulli_distribution coin(0.5);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto scm = random_binary_scm(rng, Topology::Sequential);
    ReferenceConfig cfg;
    cfg.a = 1;
    cfg.a_star = 0;
    if (coin(rng)) std::swap(cfg.a, cfg.a_star);
    cfg.m1_star = coin(rng);
    cfg.m2_star = coin(rng);
    const auto e = enumerate_binary_components(scm, cfg);
    const auto p = decompose_empirical_sequential(tables_from_binary_scm(scm), cfg);
    const auto l = latent_enumeration_components(scm, cfg);
    for (auto name : e.names()) {
      worst = std::max(worst, rel_gap(p[name], e[name]));
      worst = std::max(worst, rel_gap(l[name], e[name]));
      worst = std::max(worst, rel_gap(l[name], p[name]));
    }
    for (auto a : kAggregateNames) {
      worst = std::max(worst, rel_gap(p[a], e[a]));
      worst = std::max(worst, rel_gap(l[a], e[a]));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-12 && secs < 10.0,
          "200 models, worst gap " + num(worst) + ", " + num(secs) + " s (limit 10 s)"};
}

// --- 4 -------------------------------------------------------------------

Result monte_carlo_triangle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(404);
  std::size_t exceed = 0, cells = 0;
  double worst_band = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto scm = random_linear_scm(rng, 1, true);
    const auto cfg = random_config(rng, 1, Topology::Sequential);
    const auto cf = decompose_sequential_closed_form(scm.coefficients(), cfg);
    const auto mc = simulate_linear_components(scm, cfg, 1'000'000, 9000 + i);
    for (std::size_t j = 0; j < cf.size(); ++j) {
      ++cells;
      const double delta = std::abs(mc.estimate.values()[j] - cf.values()[j]);
      const double se = mc.std_error[j];
      const double slack = 1e-12 * scale_of(cf);
      if (delta > 3.0 * se + slack) ++exceed;
      worst_band = std::max(worst_band, delta / (3.0 * se + slack));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {exceed <= 2 && secs < 120.0,
          std::to_string(exceed) + " of " + std::to_string(cells) +
              " cells beyond 3 SE (at most 2 allowed), largest |delta| / band " +
              num(worst_band) + ", " +
              num(secs) + " s (limit 120 s)"};
}

// --- 5 -------------------------------------------------------------------

Result vanishing() {
  std::mt19937_64 rng(505);
  const ComponentName interactions_seq[] = {
      ComponentName::IntRefAM1,  ComponentName::IntRefAM2PlusAM1M2, ComponentName::NatIntAM1,
      ComponentName::NatIntAM2,  ComponentName::NatIntAM1M2,        ComponentName::NatIntM1M2};
  const ComponentName interactions_non[] = {
      ComponentName::IntRefAM1, ComponentName::IntRefAM2,   ComponentName::IntRefAM1M2,
      ComponentName::NatIntAM1, ComponentName::NatIntAM2,   ComponentName::NatIntAM1M2,
      ComponentName::NatIntM1M2};
  const ComponentName no_m1_path[] = {ComponentName::NatIntAM1, ComponentName::NatIntAM1M2,
                                      ComponentName::NatIntM1M2, ComponentName::PieM1};
  const ComponentName no_m2_path[] = {ComponentName::NatIntAM2, ComponentName::PieM2};

  std::size_t bad_theta_seq = 0, bad_theta_non = 0, bad_gamma = 0, bad_beta = 0;
  std::string first_bad;
  for (int i = 0; i < 1000; ++i) {
    for (auto topo : {Topology::Sequential, Topology::NonSequential}) {
      const bool seq = topo == Topology::Sequential;
      const std::size_t k = random_k(rng);
      const auto base = random_linear_scm(rng, k, seq);
      const auto cfg = random_config(rng, k, topo);

      auto m = base.coefficients();
      for (int j = 4; j < 8; ++j) m.theta[j] = 0.0;
      auto cs = decompose_closed_form(m, cfg);
      const auto names = seq ? std::span<const ComponentName>(interactions_seq)
                             : std::span<const ComponentName>(interactions_non);
      for (auto c : names) {
        if (cs[c] != 0.0) {
          if (seq) ++bad_theta_seq;
          else ++bad_theta_non;
          if (first_bad.empty())
            first_bad = std::string(to_string(c)) + " = " + num(cs[c]) + " (" +
                        std::string(to_string(topo)) + ")";
        }
      }

      m = base.coefficients();
      m.gamma[1] = 0.0;
      cs = decompose_closed_form(m, cfg);
      for (auto c : no_m1_path)
        if (cs[c] != 0.0) ++bad_gamma;

      m = base.coefficients();
      m.beta[1] = 0.0;
      m.beta[3] = 0.0;
      cs = decompose_closed_form(m, cfg);
      for (auto c : no_m2_path)
        if (cs[c] != 0.0) ++bad_beta;
    }
  }
  const bool pass = bad_theta_seq + bad_theta_non + bad_gamma + bad_beta == 0;
  std::string detail = "2000 instances; no outcome interactions: " +
                       std::to_string(bad_theta_seq) + " sequential and " +
                       std::to_string(bad_theta_non) + " non-sequential nonzero values";
  if (!first_bad.empty()) detail += " (e.g. " + first_bad + ")";
  detail += "; gamma1 = 0: " + std::to_string(bad_gamma) + " nonzero; beta1 = beta3 = 0: " +
            std::to_string(bad_beta) + " nonzero";
  return {pass, detail};
}

// --- 6 -------------------------------------------------------------------

Result reduction_nonsequential() {
  // Individuals: the 16 binary mediator response types (M1(0), M1(1), M2(0),
  // M2(1)). The reduction is claimed for those with M1(0) = M2(0) = 0; each is
  // checked against all 256 binary outcome response tables, where the
  // arithmetic is exact, and 200 real-valued ones, where the two expressions
  // may round differently.
  std::mt19937_64 rng(606);
  std::size_t types = 0, checks = 0, mismatches = 0;
  double worst_real = 0.0;
  bool integer_y = true;
  ReferenceConfig cfg;
  cfg.a = 1;
  cfg.a_star = 0;
  cfg.m1_star = 0;
  cfg.m2_star = 0;
  cfg.topology = Topology::NonSequential;

  auto compare = [&](const tables::YTable& y, const tables::NonSeqType& t) {
    const auto full = tables::table_nonsequential(y, t);
    const auto reduced = tables::table_nonsequential_reduced(y, t);
    auto potentials = make_potentials(
        [&](double a) { return double(a > 0.5 ? t.m1_1 : t.m1_0); },
        [&](double a, double) { return double(a > 0.5 ? t.m2_1 : t.m2_0); },
        [&](double a, double m1, double m2) {
          return y[a > 0.5][m1 > 0.5][m2 > 0.5];
        });
    const auto lib = individual_components_nonsequential(potentials, cfg);
    const std::pair<double, double> pairs[] = {
        {full.natint_am1, reduced.natint_am1},       {full.natint_am2, reduced.natint_am2},
        {full.natint_am1m2, reduced.natint_am1m2},   {full.natint_m1m2, reduced.natint_m1m2},
        {full.pie_m1, reduced.pie_m1},               {full.pie_m2, reduced.pie_m2},
        {lib[ComponentName::NatIntAM1], reduced.natint_am1},
        {lib[ComponentName::NatIntAM2], reduced.natint_am2},
        {lib[ComponentName::NatIntAM1M2], reduced.natint_am1m2},
        {lib[ComponentName::NatIntM1M2], reduced.natint_m1m2},
        {lib[ComponentName::PieM1], reduced.pie_m1},
        {lib[ComponentName::PieM2], reduced.pie_m2}};
    for (const auto& [x, r] : pairs) {
      ++checks;
      if (integer_y) {
        if (x != r) ++mismatches;
      } else {
        worst_real = std::max(worst_real, std::abs(x - r));
        if (std::abs(x - r) > 1e-13) ++mismatches;
      }
    }
  };

  for (int code = 0; code < 16; ++code) {
    const tables::NonSeqType t{code & 1, (code >> 1) & 1, (code >> 2) & 1, (code >> 3) & 1};
    if (t.m1_0 != 0 || t.m2_0 != 0) continue;
    ++types;
    for (int ycode = 0; ycode < 256; ++ycode) {
      tables::YTable y{};
      for (int bit = 0; bit < 8; ++bit) y[bit >> 2][(bit >> 1) & 1][bit & 1] = (ycode >> bit) & 1;
      compare(y, t);
    }
    integer_y = true;
    for (int r = 0; r < 200; ++r) {
      integer_y = false;
      tables::YTable y{};
      for (auto& plane : y)
        for (auto& row : plane)
          for (auto& v : row) v = uniform(rng, -5.0, 5.0);
      compare(y, t);
    }
  }
  return {mismatches == 0 && types == 4,
          std::to_string(types) + " of 16 mediator types satisfy the condition; " +
              std::to_string(checks) + " comparisons, " + std::to_string(mismatches) +
              " unequal (binary outcomes compared exactly, real outcomes to 1e-13; worst real gap " +
              num(worst_real) + ")"};
}

// --- 7 -------------------------------------------------------------------

Result reduction_sequential() {
  std::mt19937_64 rng(707);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = random_k(rng);
    const auto scm = random_linear_scm(rng, k, false);
    auto cfg = random_config(rng, k, Topology::NonSequential);
    const auto non = decompose_nonsequential_closed_form(scm.coefficients(), cfg);
    cfg.topology = Topology::Sequential;
    const auto seq = decompose_sequential_closed_form(scm.coefficients(), cfg);
    auto gap = [&](double x, double y) { worst = std::max(worst, rel_gap(x, y)); };
    for (auto c : seq.names()) {
      if (c == ComponentName::IntRefAM2PlusAM1M2)
        gap(seq[c], non[ComponentName::IntRefAM2] + non[ComponentName::IntRefAM1M2]);
      else
        gap(seq[c], non[c]);
    }
    for (auto a : kAggregateNames) gap(seq[a], non[a]);
  }
  return {worst <= 1e-10, "1000 instances, worst relative gap " + num(worst) + " (limit 1e-10)"};
}

// --- 8 and 9: a fixed model for the estimation criteria -------------------

LinearScm estimation_scm() {
  LinearScm s;
  s.theta = {1.0, 0.5, 0.4, 0.6, 0.3, -0.25, 0.2, 0.15};
  s.theta_c = {0.3};
  s.beta = {0.5, 0.6, 0.4, 0.3};
  s.beta_c = {0.2};
  s.gamma = {0.3, 0.8};
  s.gamma_c = {-0.4};
  s.sigma_y = 1.0;
  s.sigma_m1 = 1.0;
  s.sigma_m2 = 1.0;
  return s;
}

SimulationDesign estimation_design() {
  SimulationDesign d;
  d.exposure = {VariableLaw::Kind::Bernoulli, 0.5, 0.0, 1.0};
  d.covariates = {{VariableLaw::Kind::Normal, 0.5, 0.0, 1.0}};
  return d;
}

ReferenceConfig estimation_reference() {
  ReferenceConfig cfg;
  cfg.a = 1.0;
  cfg.a_star = 0.0;
  cfg.m1_star = 0.5;
  cfg.m2_star = 1.0;
  cfg.covariates = {0.2};
  return cfg;
}

// Parameters in the order theta, theta_c, beta, beta_c, gamma, gamma_c, sigma_m1^2.
std::vector<double> pack(const ModelCoefficients& m) {
  std::vector<double> p(m.theta.begin(), m.theta.end());
  p.insert(p.end(), m.theta_c.begin(), m.theta_c.end());
  p.insert(p.end(), m.beta.begin(), m.beta.end());
  p.insert(p.end(), m.beta_c.begin(), m.beta_c.end());
  p.insert(p.end(), m.gamma.begin(), m.gamma.end());
  p.insert(p.end(), m.gamma_c.begin(), m.gamma_c.end());
  p.push_back(m.sigma_m1 * m.sigma_m1);
  return p;
}

ModelCoefficients unpack(const std::vector<double>& p, std::size_t k) {
  ModelCoefficients m;
  std::size_t i = 0;
  for (auto& t : m.theta) t = p[i++];
  for (std::size_t j = 0; j < k; ++j) m.theta_c.push_back(p[i++]);
  for (auto& b : m.beta) b = p[i++];
  for (std::size_t j = 0; j < k; ++j) m.beta_c.push_back(p[i++]);
  for (auto& g : m.gamma) g = p[i++];
  for (std::size_t j = 0; j < k; ++j) m.gamma_c.push_back(p[i++]);
  m.sigma_m1 = std::sqrt(std::max(0.0, p[i]));
  return m;
}

// Delta-method standard errors: numerical gradient of each component in the
// fitted parameters, block-diagonal covariance across the three models, and
// Var(sigma^2) = 2 sigma^4 / (n - p) for the M1 residual variance.
std::vector<double> delta_method_se(const FittedModels& f, const ReferenceConfig& cfg) {
  const std::size_t k = f.coefficients.covariate_dim();
  const auto p0 = pack(f.coefficients);
  const std::size_t np = p0.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(np),
                                              static_cast<Eigen::Index>(np));
  Eigen::Index off = 0;
  for (const OlsFit* fit : {&f.outcome, &f.mediator2, &f.mediator1}) {
    const auto q = fit->covariance.rows();
    cov.block(off, off, q, q) = fit->covariance;
    off += q;
  }
  const double s2 = p0.back();
  const double dof = static_cast<double>(f.mediator1.n - f.mediator1.p);
  cov(off, off) = 2.0 * s2 * s2 / dof;

  const auto base = decompose_closed_form(unpack(p0, k), cfg);
  const std::size_t nc = base.size() + kAggregateNames.size();
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(np));
  auto flatten = [&](const ComponentSet& cs) {
    std::vector<double> v(cs.values().begin(), cs.values().end());
    for (auto a : kAggregateNames) v.push_back(cs[a]);
    return v;
  };
  for (std::size_t j = 0; j < np; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(p0[j]));
    auto up = p0, dn = p0;
    up[j] += h;
    dn[j] -= h;
    const auto fu = flatten(decompose_closed_form(unpack(up, k), cfg));
    const auto fd = flatten(decompose_closed_form(unpack(dn, k), cfg));
    for (std::size_t c = 0; c < nc; ++c)
      jac(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) = (fu[c] - fd[c]) / (2 * h);
  }
  const Eigen::MatrixXd v = jac * cov * jac.transpose();
  std::vector<double> se(nc);
  for (std::size_t c = 0; c < nc; ++c)
    se[c] = std::sqrt(v(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c)));
  return se;
}

Result end_to_end_recovery() {
  const auto scm = estimation_scm();
  const auto cfg = estimation_reference();
  const auto truth = decompose_sequential_closed_form(scm.coefficients(), cfg);
  int good_seeds = 0;
  double worst_z = 0.0;
  std::string worst_name;
  for (int seed = 1; seed <= 20; ++seed) {
    const auto d = simulate_linear_dataset(scm, estimation_design(), 50'000, 800 + seed);
    const auto f = fit_all(d, Topology::Sequential);
    const auto est = decompose_sequential_closed_form(f.coefficients, cfg);
    const auto se = delta_method_se(f, cfg);
    bool all_in = true;
    for (std::size_t c = 0; c < truth.size(); ++c) {
      const double z = std::abs(est.values()[c] - truth.values()[c]) / se[c];
      if (z > worst_z) {
        worst_z = z;
        worst_name = std::string(to_string(truth.names()[c]));
      }
      if (!(z <= 4.0)) all_in = false;
    }
    if (all_in) ++good_seeds;
  }
  return {good_seeds >= 18, std::to_string(good_seeds) +
                                " of 20 seeds with every component within 4 delta-method SEs "
                                "(need 18); largest |z| " +
                                num(worst_z) + " (" + worst_name + ")"};
}

Result bootstrap_coverage() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto scm = estimation_scm();
  auto cfg = estimation_reference();
  cfg.topology = Topology::Sequential;
  const auto truth = decompose_sequential_closed_form(scm.coefficients(), cfg);
  std::vector<int> covered(truth.size(), 0);
  const int datasets = 200;
  for (int i = 0; i < datasets; ++i) {
    const auto d = simulate_linear_dataset(scm, estimation_design(), 2000, 5000 + i);
    const auto boot = bootstrap_decomposition(d, cfg, 500, 0.95, 70000 + i);
    for (std::size_t c = 0; c < truth.size(); ++c) {
      const auto ci = boot.components[c];
      if (ci.lower <= truth.values()[c] && truth.values()[c] <= ci.upper) ++covered[c];
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double lowest = 1.0;
  std::string lowest_name, listing;
  for (std::size_t c = 0; c < truth.size(); ++c) {
    const double rate = covered[c] / double(datasets);
    if (rate < lowest) {
      lowest = rate;
      lowest_name = std::string(to_string(truth.names()[c]));
    }
    listing += (c ? " " : "") + std::string(to_string(truth.names()[c])) + "=" + num(rate);
  }
  return {lowest >= 0.85 && secs < 600.0,
          "lowest coverage " + num(lowest) + " (" + lowest_name + "), " + num(secs) +
              " s (limit 600 s); " + listing};
}

// --- 10 ------------------------------------------------------------------

Result reference_docs() {
  const auto path = std::filesystem::path(TWOMED_SOURCE_DIR) / "docs" / "reference_output.md";
  std::ifstream in(path);
  if (!in) return {false, "missing " + path.string()};
  std::stringstream s;
  s << in.rdbuf();
  const std::string text = s.str();
  std::string missing;
  for (const char* needle : {"0.238", "-0.969", "1.429", "0.143", "0.00803", "0.363",
                             "not an acceptance gate"})
    if (text.find(needle) == std::string::npos) missing += std::string(" '") + needle + "'";
  return {missing.empty(), missing.empty() ? "reference values and caveat present"
                                           : "missing:" + missing};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "Run just these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "sum identity", true, true, sum_identity},
      {2, "TE polynomial vs W1 - W8", true, true, te_double_path},
      {3, "binary oracle triangle", true, true, binary_triangle},
      {4, "Monte Carlo vs closed form", true, true, monte_carlo_triangle},
      {5, "vanishing conditions", false, true, vanishing},
      {6, "non-sequential reduction under M1(0) = M2(0) = 0", true, true, reduction_nonsequential},
      {7, "sequential reduces to non-sequential", true, true, reduction_sequential},
      {8, "end-to-end recovery at n = 50000", true, true, end_to_end_recovery},
      {9, "bootstrap coverage", true, true, bootstrap_coverage},
      {10, "reference values in the docs (non-gating)", true, false, reference_docs},
  };

  bool as_expected = true;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("threw: ") + e.what()};
    }
    std::string note;
    if (!c.gating) note = " [non-gating]";
    else if (!c.expect_pass) note = " [expected FAIL, see README]";
    std::printf("CRITERION %d %s: %s - %s%s\n", c.id, c.title, r.pass ? "PASS" : "FAIL",
                r.detail.c_str(), note.c_str());
    std::fflush(stdout);
    if (c.gating && r.pass != c.expect_pass) as_expected = false;
  }
  return as_expected ? 0 : 1;
}
