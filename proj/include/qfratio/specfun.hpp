#pragma once

#include <complex>
#include <vector>

namespace qfratio {

/// Confluent hypergeometric function 1F1(a; b; z) for a, b > 0.
///
/// Kummer series up to z = 60, the large-z asymptotic expansion above.
/// Negative z goes through Kummer's transformation. Throws NumericalFailure
/// when the result overflows a double; use log_hyp1f1 in that regime.
double hyp1f1(double a, double b, double z);

/// log 1F1(a; b; z) for a, b > 0 and z >= 0.
double log_hyp1f1(double a, double b, double z);

double ln_beta(double a, double b);

/// Stirling's approximation sqrt(2 pi) x^(x-1/2) e^-x to Gamma(x).
double stirling_gamma_hat(double x);
double log_stirling_gamma_hat(double x);

/// Stirling's approximation sqrt(2 pi) a^(a-1/2) b^(b-1/2) / (a+b)^(a+b-1/2)
/// to B(a, b).
double stirling_beta_hat(double a, double b);
double log_stirling_beta_hat(double a, double b);

double erf(double x);
double normal_pdf(double x);
double normal_cdf(double x);

/// weight * chi^2(df, noncentrality)
struct Chi2Term {
  double weight = 0.0;
  int df = 1;
  double noncentrality = 0.0;
};

/// Sum of independent weighted noncentral chi-square variables.
struct Chi2Combo {
  std::vector<Chi2Term> terms;

  /// Total degrees of freedom of the terms with nonzero weight.
  int total_df() const;
};

/// E exp(i t X) for X the combination.
std::complex<double> characteristic_function(const Chi2Combo& combo, double t);

/// Density of the combination at zero by inverting the characteristic
/// function. Requires total_df() >= 3. Zero when all weights share a sign.
double density_at_zero(const Chi2Combo& combo, double tol = 1e-10);

struct TailPair {
  double lower = 0.0;  // P(X <= x)
  double upper = 0.0;  // P(X > x)
};

/// Both tails of the combination at x by Imhof's inversion integral.
/// `tol` is the absolute accuracy target.
TailPair imhof_tails(const Chi2Combo& combo, double x, double tol = 1e-10);

double imhof_cdf(const Chi2Combo& combo, double x, double tol = 1e-10);

}  // namespace qfratio
