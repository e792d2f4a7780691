#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "qfratio/quadform.hpp"

namespace qfratio {

/// Lag-`lag` least-squares serial correlation
/// sum_t e_t e_{t+lag} / sum_{t <= n-lag} e_t^2 (1-based t).
/// With a design matrix X both forms are sandwiched by the residual
/// projector M = I - X (X'X)^{-1} X'. The mean defaults to zero.
QuadFormRatio ls_serial_corr(int n, int lag, const std::optional<Matrix>& X = std::nullopt,
                             const std::optional<Vector>& mu = std::nullopt);

/// Durbin-Watson d = sum (e_t - e_{t-1})^2 / sum e_t^2 on regression
/// residuals: A = M D'D M, B = M.
QuadFormRatio durbin_watson(int n, const Matrix& X, const std::optional<Vector>& mu = std::nullopt);

/// A = diag(I_m, 0), B = I_n, mean (mu, 0, ..., 0). R is noncentral
/// Beta(m/2, (n-m)/2) with noncentrality theta = |mu|^2.
QuadFormRatio beta_matrices(int n, int m, const Vector& mu);

/// R = e2 / e1 with e_i ~ N(mu_i, 1).
QuadFormRatio ratio_n2(double mu1, double mu2);

/// Residual projector I - X (X'X)^{-1} X'. Throws InvalidInput when X is
/// rank deficient or has n or more columns.
Matrix residual_projector(const Matrix& X);

enum class Design { none, intercept, trend };

Design parse_design(std::string_view name);

/// Intercept column, or intercept and linear trend, for n observations.
std::optional<Matrix> design_matrix(Design d, int n);

struct BuilderSpec {
  std::string kind;  // ls_serial | durbin_watson | beta | ratio_n2
  int n = 2;
  int lag = 1;
  int m = 1;
  Design design = Design::none;
  std::optional<Vector> mu;
};

QuadFormRatio build(const BuilderSpec& spec);

}  // namespace qfratio
