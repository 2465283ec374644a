#include "twomed/regression.hpp"

#include <cmath>
#include <string>

namespace twomed {

namespace {

std::string cov_name(const Dataset& d, std::size_t j) {
  return j < d.covariate_names.size() ? d.covariate_names[j] : "C" + std::to_string(j + 1);
}

void append_covariates(Eigen::MatrixXd& x, const Dataset& d) {
  if (d.k() > 0) x.rightCols(static_cast<Eigen::Index>(d.k())) = d.covariates;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

}  // namespace

OlsFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               const std::vector<std::string>& names, bool with_inference,
               const std::string& model) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (y.size() != n) throw EstimationError(model + ": response and design lengths differ");
  if (n <= p)
    throw EstimationError(model + ": " + std::to_string(n) + " rows cannot identify " +
                          std::to_string(p) + " coefficients");

  Eigen::VectorXd scale = x.colwise().norm().transpose();
  std::vector<std::string> dead;
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(scale[j] > 0.0)) dead.push_back(names.at(static_cast<std::size_t>(j)));
  if (!dead.empty())
    throw EstimationError(model + ": rank-deficient design, all-zero column(s): " + join(dead));

  const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    const auto& perm = qr.colsPermutation().indices();
    std::vector<std::string> collinear;
    for (Eigen::Index j = qr.rank(); j < p; ++j)
      collinear.push_back(names.at(static_cast<std::size_t>(perm[j])));
    throw EstimationError(model + ": rank-deficient design; column(s) " + join(collinear) +
                          " are linear combinations of the others");
  }

  OlsFit fit;
  fit.n = static_cast<std::size_t>(n);
  fit.p = static_cast<std::size_t>(p);
  fit.names = names;
  const Eigen::VectorXd beta_scaled = qr.solve(y);
  fit.coef = beta_scaled.cwiseQuotient(scale);
  const Eigen::VectorXd resid = y - xs * beta_scaled;
  const double rss = resid.squaredNorm();
  fit.sigma = std::sqrt(rss / static_cast<double>(n - p));
  const double tss = (y.array() - y.mean()).square().sum();
  fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;

  if (with_inference) {
    const auto r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv = r.solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd xtx_inv_perm = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    Eigen::MatrixXd xtx_inv = perm * xtx_inv_perm * perm.transpose();
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < p; ++j) xtx_inv(i, j) /= scale[i] * scale[j];
    fit.covariance = fit.sigma * fit.sigma * xtx_inv;
    fit.std_error = fit.covariance.diagonal().cwiseSqrt();
  }
  return fit;
}

Eigen::MatrixXd outcome_design(const Dataset& d) {
  const auto n = static_cast<Eigen::Index>(d.n());
  Eigen::MatrixXd x(n, 8 + static_cast<Eigen::Index>(d.k()));
  x.col(0).setOnes();
  x.col(1) = d.a;
  x.col(2) = d.m1;
  x.col(3) = d.m2;
  x.col(4) = d.a.cwiseProduct(d.m1);
  x.col(5) = d.a.cwiseProduct(d.m2);
  x.col(6) = d.m1.cwiseProduct(d.m2);
  x.col(7) = x.col(4).cwiseProduct(d.m2);
  append_covariates(x, d);
  return x;
}

Eigen::MatrixXd mediator2_design(const Dataset& d, Topology t) {
  const auto n = static_cast<Eigen::Index>(d.n());
  const Eigen::Index base = t == Topology::Sequential ? 4 : 2;
  Eigen::MatrixXd x(n, base + static_cast<Eigen::Index>(d.k()));
  x.col(0).setOnes();
  x.col(1) = d.a;
  if (t == Topology::Sequential) {
    x.col(2) = d.m1;
    x.col(3) = d.a.cwiseProduct(d.m1);
  }
  append_covariates(x, d);
  return x;
}

Eigen::MatrixXd mediator1_design(const Dataset& d) {
  const auto n = static_cast<Eigen::Index>(d.n());
  Eigen::MatrixXd x(n, 2 + static_cast<Eigen::Index>(d.k()));
  x.col(0).setOnes();
  x.col(1) = d.a;
  append_covariates(x, d);
  return x;
}

std::vector<std::string> outcome_names(const Dataset& d) {
  const auto &a = d.a_name, &m1 = d.m1_name, &m2 = d.m2_name;
  std::vector<std::string> v = {"(intercept)", a, m1, m2, a + ":" + m1, a + ":" + m2,
                                m1 + ":" + m2, a + ":" + m1 + ":" + m2};
  for (std::size_t j = 0; j < d.k(); ++j) v.push_back(cov_name(d, j));
  return v;
}

std::vector<std::string> mediator2_names(const Dataset& d, Topology t) {
  std::vector<std::string> v = {"(intercept)", d.a_name};
  if (t == Topology::Sequential) {
    v.push_back(d.m1_name);
    v.push_back(d.a_name + ":" + d.m1_name);
  }
  for (std::size_t j = 0; j < d.k(); ++j) v.push_back(cov_name(d, j));
  return v;
}

std::vector<std::string> mediator1_names(const Dataset& d) {
  std::vector<std::string> v = {"(intercept)", d.a_name};
  for (std::size_t j = 0; j < d.k(); ++j) v.push_back(cov_name(d, j));
  return v;
}

namespace {

ModelCoefficients assemble(const OlsFit& y, const OlsFit& m2, const OlsFit& m1, Topology t,
                           std::size_t k) {
  ModelCoefficients m;
  for (int i = 0; i < 8; ++i) m.theta[i] = y.coef[i];
  const Eigen::Index b_base = t == Topology::Sequential ? 4 : 2;
  m.beta[0] = m2.coef[0];
  m.beta[1] = m2.coef[1];
  if (t == Topology::Sequential) {
    m.beta[2] = m2.coef[2];
    m.beta[3] = m2.coef[3];
  }
  m.gamma[0] = m1.coef[0];
  m.gamma[1] = m1.coef[1];
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    m.theta_c.push_back(y.coef[8 + jj]);
    m.beta_c.push_back(m2.coef[b_base + jj]);
    m.gamma_c.push_back(m1.coef[2 + jj]);
  }
  m.sigma_m1 = m1.sigma;
  m.sigma_y = y.sigma;
  m.sigma_m2 = m2.sigma;
  return m;
}

void check_rows(const Dataset& d) {
  d.validate();
  if (d.n() <= 8 + d.k())
    throw EstimationError("need more than " + std::to_string(8 + d.k()) +
                          " rows to fit the outcome model, got " + std::to_string(d.n()));
}

}  // namespace

FittedModels fit_all(const Dataset& d, Topology t) {
  check_rows(d);
  FittedModels f;
  f.topology = t;
  f.outcome = fit_ols(outcome_design(d), d.y, outcome_names(d), true, "outcome model");
  f.mediator2 =
      fit_ols(mediator2_design(d, t), d.m2, mediator2_names(d, t), true, "M2 model");
  f.mediator1 = fit_ols(mediator1_design(d), d.m1, mediator1_names(d), true, "M1 model");
  f.coefficients = assemble(f.outcome, f.mediator2, f.mediator1, t, d.k());
  f.residual_sigma_m1 = f.mediator1.sigma;
  return f;
}

ModelCoefficients fit_coefficients(const Dataset& d, Topology t) {
  check_rows(d);
  const auto y = fit_ols(outcome_design(d), d.y, outcome_names(d), false, "outcome model");
  const auto m2 = fit_ols(mediator2_design(d, t), d.m2, mediator2_names(d, t), false, "M2 model");
  const auto m1 = fit_ols(mediator1_design(d), d.m1, mediator1_names(d), false, "M1 model");
  return assemble(y, m2, m1, t, d.k());
}

}  // namespace twomed
