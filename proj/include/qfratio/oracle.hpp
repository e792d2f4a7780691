#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qfratio/quadform.hpp"
#include "qfratio/specfun.hpp"

namespace qfratio {

/// Philox4x64 with 10 rounds: a keyed bijection on 256-bit counters.
struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

/// Normal variates addressed by (seed, draw, index). Draw d of a stream is
/// the same no matter which thread produces it or in which order.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t seed) : seed_(seed) {}

  /// Fills `out[0..count)` with the standard normals of draw `draw`.
  void normals(std::uint64_t draw, double* out, int count) const;

  /// Uniform on (0, 1) from the top 52 bits of x.
  static double to_uniform(std::uint64_t x);

 private:
  std::uint64_t seed_;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_draws = 0;
  std::uint64_t seed = 0;
};

/// Proportion of draws of R with R <= r. Needs n_draws >= 1000.
McEstimate mc_cdf(const QuadFormRatio& ratio, double r, std::uint64_t n_draws,
                  std::uint64_t seed);

/// mc_cdf at every grid point from one shared set of draws.
std::vector<McEstimate> mc_cdf_grid(const QuadFormRatio& ratio, const std::vector<double>& grid,
                                    std::uint64_t n_draws, std::uint64_t seed);

/// Density of the combination at zero from the box-kernel counts at
/// half-widths h and h/2, combined to cancel the O(h^2) bias.
McEstimate mc_density_at_zero(const Chi2Combo& combo, double h, std::uint64_t n_draws,
                              std::uint64_t seed);

/// Proportion of draws of the combination with X <= x.
McEstimate mc_cdf_combo(const Chi2Combo& combo, double x, std::uint64_t n_draws,
                        std::uint64_t seed);

/// Chi-square combination of X_r = e'(A - rB)e.
Chi2Combo combo_at(const QuadFormRatio& ratio, double r);

/// P(R <= r) and P(R > r) by Imhof inversion of X_r at zero.
TailPair imhof_tails_of_R(const QuadFormRatio& ratio, double r, double tol = 1e-10);

double imhof_cdf_of_R(const QuadFormRatio& ratio, double r, double tol = 1e-10);

/// Richardson-extrapolated central difference of the Imhof tails, step
/// 1e-4 * max(1, |r|) shortened near a finite edge. Zero outside the open
/// support.
double imhof_density_of_R(const QuadFormRatio& ratio, double r);

/// Exact density of e2 / e1 for e_i ~ N(mu_i, 1).
double exact_density_n2(double mu1, double mu2, double r);

/// Both tails of e2 / e1 by adaptive integration of exact_density_n2.
TailPair exact_cdf_n2(double mu1, double mu2, double r, double rel_tol = 1e-12);

/// (mu1, mu2) when the ratio is e2 / e1 (the ratio_n2 layout).
std::optional<std::pair<double, double>> as_n2(const QuadFormRatio& ratio);

struct CurvePoint {
  double r = 0.0;
  double s_hat = 0.0;
  double exact_cdf = 0.0;
  double approx_cdf = 0.0;
  /// F/F^ when s_hat <= 0, (1-F)/(1-F^) otherwise.
  double tail_ratio = 0.0;
  double exact_pdf = 0.0;
  double approx_pdf = 0.0;
  double pdf_ratio = 0.0;
  bool exact_density_closed_form = false;
};

/// Exact-over-approximate ratios on a grid inside the support. The exact
/// reference is the closed form for e2 / e1 and Imhof inversion otherwise.
std::vector<CurvePoint> relative_error_curve(const QuadFormRatio& ratio,
                                             const std::vector<double>& grid);

CurvePoint relative_error_point(const QuadFormRatio& ratio, double r);

}  // namespace qfratio
