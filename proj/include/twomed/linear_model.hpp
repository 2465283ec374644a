#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace twomed {

/// Coefficients of the three linear models
///
///   E[Y  | A, M1, M2, C] = th0 + th1 A + th2 M1 + th3 M2 + th4 A M1 + th5 A M2
///                          + th6 M1 M2 + th7 A M1 M2 + theta_c' C
///   E[M2 | A, M1, C]     = b0 + b1 A + b2 M1 + b3 A M1 + beta_c' C
///   E[M1 | A, C]         = g0 + g1 A + gamma_c' C
///
/// as estimated or supplied by a user. The non-sequential topology is the
/// special case b2 = b3 = 0. sigma_m1 enters the closed forms through
/// E[M1^2]; zero is allowed for deterministic-M1 what-if analyses.
struct ModelCoefficients {
  std::array<double, 8> theta{};
  std::vector<double> theta_c;
  std::array<double, 4> beta{};
  std::vector<double> beta_c;
  std::array<double, 2> gamma{};
  std::vector<double> gamma_c;
  double sigma_m1 = 0.0;
  std::optional<double> sigma_y;
  std::optional<double> sigma_m2;

  std::size_t covariate_dim() const { return theta_c.size(); }

  /// Throws DomainError on mismatched covariate vectors, non-finite values or
  /// negative sigma_m1.
  void validate() const;
};

/// Ground-truth structural model with Gaussian errors:
///   M1 = g0 + g1 a + gamma_c' c + e_M1,          e_M1 ~ N(0, sigma_m1^2)
///   M2 = b0 + b1 a + b2 m1 + b3 a m1 + beta_c' c + e_M2
///   Y  = outcome linear predictor + e_Y
struct LinearScm {
  std::array<double, 8> theta{};
  std::vector<double> theta_c;
  std::array<double, 4> beta{};
  std::vector<double> beta_c;
  std::array<double, 2> gamma{};
  std::vector<double> gamma_c;
  double sigma_y = 1.0;
  double sigma_m1 = 1.0;
  double sigma_m2 = 1.0;

  std::size_t covariate_dim() const { return theta_c.size(); }
  void validate() const;

  /// The same numbers viewed as model coefficients.
  ModelCoefficients coefficients() const;
};

double dot(std::span<const double> x, std::span<const double> y);

}  // namespace twomed
