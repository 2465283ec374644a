#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace twomed {

/// Analysis data: exposure, two mediators, outcome and an n x k covariate
/// matrix. Rows with missing or non-numeric fields never reach this type; the
/// loader drops them and records how many in dropped_rows.
struct Dataset {
  Eigen::VectorXd a, m1, m2, y;
  Eigen::MatrixXd covariates;  // n x k, k may be 0
  std::string a_name = "A", m1_name = "M1", m2_name = "M2", y_name = "Y";
  std::vector<std::string> covariate_names;
  std::size_t dropped_rows = 0;

  std::size_t n() const { return static_cast<std::size_t>(a.size()); }
  std::size_t k() const { return static_cast<std::size_t>(covariates.cols()); }

  /// Equal column lengths, matching covariate names, finite values. Throws
  /// DataError.
  void validate() const;

  /// Rows picked by index, in order (used by the bootstrap).
  Dataset subset(const std::vector<std::size_t>& rows) const;

  /// Column means of the covariates.
  std::vector<double> covariate_means() const;
};

}  // namespace twomed
