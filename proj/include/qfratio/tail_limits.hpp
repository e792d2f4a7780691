#pragma once

#include "qfratio/support.hpp"

namespace qfratio {

/// Edge limit when a single pencil eigenvalue vanishes. RE is the limiting
/// true/approximate ratio for both the CDF tail and the density.
struct TailLimitSimple {
  double t0 = 0.0;
  double u0 = 0.0;
  double eta2 = 0.0;
  double RE = 0.0;
};

/// Edge limit for a vanishing eigenvalue of multiplicity m.
struct TailLimitMultiple {
  double t0 = 0.0;
  double u0 = 0.0;
  Vector eta1;
  Vector eta2;
  Vector eta3;
  double W_J = 0.0;
  double RE_cdf = 0.0;
  double RE_pdf = 0.0;
};

/// Right edge of the noncentral beta ratio with noncentrality theta.
struct BetaLimit {
  double theta = 0.0;
  double t0 = 0.0;
  double u0 = 0.0;
  double eta2 = 0.0;
  double RE = 0.0;
};

TailLimitSimple limit_simple(int n, double nu0);

/// Uses the pairing of omega, nu0 and H_edge in `edge`. Throws InvalidInput
/// for inconsistent edge data and NumericalFailure when W_J <= 0.
TailLimitMultiple limit_multiple(int n, const EdgeStructure& edge);

BetaLimit beta_limit(int n, int m, double theta);

/// Stirling beta over the true beta, B^(a, b) / B(a, b).
double central_ratio(double a, double b);

}  // namespace qfratio
