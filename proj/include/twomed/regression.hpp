#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "twomed/dataset.hpp"
#include "twomed/linear_model.hpp"
#include "twomed/types.hpp"

namespace twomed {

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd std_error;   // empty when fitted without inference
  Eigen::MatrixXd covariance;  // sigma^2 (X'X)^-1, empty without inference
  double sigma = 0.0;          // sqrt(RSS / (n - p))
  double r_squared = 0.0;
  std::size_t n = 0, p = 0;
  std::vector<std::string> names;
};

/// Least squares through a column-pivoted Householder QR of the column-scaled
/// design; coefficients are reported in raw units. EstimationError when
/// n <= p or when the design is rank deficient (the message names the
/// columns that are linear combinations of the others).
OlsFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               const std::vector<std::string>& names, bool with_inference = true,
               const std::string& model = "regression");

struct FittedModels {
  ModelCoefficients coefficients;
  OlsFit outcome, mediator2, mediator1;
  Topology topology = Topology::Sequential;
  double residual_sigma_m1 = 0.0;  // M1 model, denominator n - (2 + k)
};

/// Outcome design [1, A, M1, M2, A*M1, A*M2, M1*M2, A*M1*M2, C].
Eigen::MatrixXd outcome_design(const Dataset& d);
/// Sequential: [1, A, M1, A*M1, C]; non-sequential: [1, A, C].
Eigen::MatrixXd mediator2_design(const Dataset& d, Topology t);
/// [1, A, C].
Eigen::MatrixXd mediator1_design(const Dataset& d);

std::vector<std::string> outcome_names(const Dataset& d);
std::vector<std::string> mediator2_names(const Dataset& d, Topology t);
std::vector<std::string> mediator1_names(const Dataset& d);

/// Fits the three models. Needs n > 8 + k.
FittedModels fit_all(const Dataset& d, Topology t);

/// Coefficients only (no standard errors), for resampling loops.
ModelCoefficients fit_coefficients(const Dataset& d, Topology t);

}  // namespace twomed
