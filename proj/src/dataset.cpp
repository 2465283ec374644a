#include "twomed/dataset.hpp"

#include <string>

#include "twomed/types.hpp"

namespace twomed {

void Dataset::validate() const {
  const auto rows = a.size();
  if (m1.size() != rows || m2.size() != rows || y.size() != rows || covariates.rows() != rows)
    throw DataError("dataset columns have different lengths");
  if (!covariate_names.empty() && covariate_names.size() != k())
    throw DataError("expected " + std::to_string(k()) + " covariate names, got " +
                    std::to_string(covariate_names.size()));
  auto finite = [](const auto& v) { return v.allFinite(); };
  if (!finite(a) || !finite(m1) || !finite(m2) || !finite(y) || !finite(covariates))
    throw DataError("dataset contains non-finite values");
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset d;
  const auto m = static_cast<Eigen::Index>(rows.size());
  d.a.resize(m);
  d.m1.resize(m);
  d.m2.resize(m);
  d.y.resize(m);
  d.covariates.resize(m, covariates.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
    d.a[i] = a[r];
    d.m1[i] = m1[r];
    d.m2[i] = m2[r];
    d.y[i] = y[r];
    d.covariates.row(i) = covariates.row(r);
  }
  d.a_name = a_name;
  d.m1_name = m1_name;
  d.m2_name = m2_name;
  d.y_name = y_name;
  d.covariate_names = covariate_names;
  return d;
}

std::vector<double> Dataset::covariate_means() const {
  std::vector<double> out(k(), 0.0);
  if (n() == 0) return out;
  const Eigen::VectorXd means = covariates.colwise().mean();
  for (std::size_t j = 0; j < k(); ++j) out[j] = means[static_cast<Eigen::Index>(j)];
  return out;
}

}  // namespace twomed
