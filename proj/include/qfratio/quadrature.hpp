#pragma once

#include <functional>

namespace qfratio {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  double l1 = 0.0;     // integral of |f|
};

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_intervals = 4000;
};

/// Globally adaptive 15/31-point Gauss-Kronrod quadrature on [a, b].
///
/// Infinite endpoints are mapped onto finite ones. The interval with the
/// largest error estimate is bisected until the total error is at most
/// max(abs_tol, rel_tol * |value|). Throws NumericalFailure otherwise.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt = {});

}  // namespace qfratio
