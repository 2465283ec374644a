#include "twomed/linear_model.hpp"

#include <cmath>
#include <string>

#include "twomed/types.hpp"

namespace twomed {

namespace {

template <class Range>
void require_finite(const Range& r, const char* what) {
  for (double v : r)
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " contains a non-finite value");
}

void require_same_dim(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c)
    throw DomainError("covariate coefficient vectors must share one dimension (theta_c=" +
                      std::to_string(a) + ", beta_c=" + std::to_string(b) +
                      ", gamma_c=" + std::to_string(c) + ")");
}

}  // namespace

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw DomainError("covariate dimension mismatch: " + std::to_string(x.size()) + " vs " +
                      std::to_string(y.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void ModelCoefficients::validate() const {
  require_same_dim(theta_c.size(), beta_c.size(), gamma_c.size());
  require_finite(theta, "theta");
  require_finite(theta_c, "theta_c");
  require_finite(beta, "beta");
  require_finite(beta_c, "beta_c");
  require_finite(gamma, "gamma");
  require_finite(gamma_c, "gamma_c");
  if (!std::isfinite(sigma_m1) || sigma_m1 < 0.0)
    throw DomainError("sigma_m1 must be finite and >= 0");
}

void LinearScm::validate() const {
  require_same_dim(theta_c.size(), beta_c.size(), gamma_c.size());
  require_finite(theta, "theta");
  require_finite(theta_c, "theta_c");
  require_finite(beta, "beta");
  require_finite(beta_c, "beta_c");
  require_finite(gamma, "gamma");
  require_finite(gamma_c, "gamma_c");
  for (double s : {sigma_y, sigma_m1, sigma_m2})
    if (!std::isfinite(s) || s <= 0.0)
      throw DomainError("sigma_y, sigma_m1 and sigma_m2 must be finite and > 0");
}

ModelCoefficients LinearScm::coefficients() const {
  ModelCoefficients m;
  m.theta = theta;
  m.theta_c = theta_c;
  m.beta = beta;
  m.beta_c = beta_c;
  m.gamma = gamma;
  m.gamma_c = gamma_c;
  m.sigma_m1 = sigma_m1;
  m.sigma_y = sigma_y;
  m.sigma_m2 = sigma_m2;
  return m;
}

}  // namespace twomed
