#include "twomed/simulate.hpp"

#include <cmath>
#include <random>

#include "twomed/types.hpp"

namespace twomed {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

double draw(const VariableLaw& law, std::mt19937_64& rng) {
  if (law.kind == VariableLaw::Kind::Bernoulli)
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < law.p ? 1.0 : 0.0;
  return law.mean + law.sd * std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace

void VariableLaw::validate(const std::string& what) const {
  if (kind == Kind::Bernoulli) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(what + ": Bernoulli p must lie in [0, 1]");
  } else if (!std::isfinite(mean) || !std::isfinite(sd) || sd <= 0.0) {
    throw DomainError(what + ": Normal law needs a finite mean and sd > 0");
  }
}

Dataset simulate_linear_dataset(const LinearScm& scm, const SimulationDesign& design,
                                std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("requested sample size must be at least 1");
  scm.validate();
  design.exposure.validate("exposure");
  const std::size_t k = scm.covariate_dim();
  if (design.covariates.size() != k)
    throw DomainError("design describes " + std::to_string(design.covariates.size()) +
                      " covariates, model has " + std::to_string(k));
  for (std::size_t j = 0; j < k; ++j) design.covariates[j].validate("covariate " + std::to_string(j));

  auto rng = make_rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Dataset d;
  const auto rows = static_cast<Eigen::Index>(n);
  d.a.resize(rows);
  d.m1.resize(rows);
  d.m2.resize(rows);
  d.y.resize(rows);
  d.covariates.resize(rows, static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) d.covariate_names.push_back("C" + std::to_string(j + 1));

  const auto& t = scm.theta;
  const auto& b = scm.beta;
  const auto& g = scm.gamma;
  std::vector<double> c(k);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < k; ++j) c[j] = draw(design.covariates[j], rng);
    const double a = draw(design.exposure, rng);
    const double m1 = g[0] + g[1] * a + dot(scm.gamma_c, c) + scm.sigma_m1 * z(rng);
    const double m2 = b[0] + b[1] * a + b[2] * m1 + b[3] * a * m1 + dot(scm.beta_c, c) +
                      scm.sigma_m2 * z(rng);
    const double y = t[0] + t[1] * a + t[2] * m1 + t[3] * m2 + t[4] * a * m1 + t[5] * a * m2 +
                     t[6] * m1 * m2 + t[7] * a * m1 * m2 + dot(scm.theta_c, c) +
                     scm.sigma_y * z(rng);
    d.a[i] = a;
    d.m1[i] = m1;
    d.m2[i] = m2;
    d.y[i] = y;
    for (std::size_t j = 0; j < k; ++j) d.covariates(i, static_cast<Eigen::Index>(j)) = c[j];
  }
  return d;
}

Dataset simulate_binary_dataset(const BinaryScm& scm, double p_exposure, double outcome_sd,
                                std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("requested sample size must be at least 1");
  scm.validate();
  if (!(p_exposure >= 0.0 && p_exposure <= 1.0))
    throw DomainError("exposure probability must lie in [0, 1]");
  if (!std::isfinite(outcome_sd) || outcome_sd < 0.0)
    throw DomainError("outcome noise sd must be finite and >= 0");

  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  Dataset d;
  const auto rows = static_cast<Eigen::Index>(n);
  d.a.resize(rows);
  d.m1.resize(rows);
  d.m2.resize(rows);
  d.y.resize(rows);
  d.covariates.resize(rows, 0);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int a = u(rng) < p_exposure ? 1 : 0;
    const int m1 = u(rng) < scm.p_m1_given_a[a] ? 1 : 0;
    const int m2 = u(rng) < scm.p_m2_given_a_m1[a][m1] ? 1 : 0;
    const double noise = z(rng);
    d.a[i] = a;
    d.m1[i] = m1;
    d.m2[i] = m2;
    d.y[i] = scm.e_y[a][m1][m2] + outcome_sd * noise;
  }
  return d;
}

}  // namespace twomed
