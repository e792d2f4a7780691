#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "qfratio/quadform.hpp"

namespace qfratio {

/// Open interval of s on which the CGF of X_r exists.
struct Strip {
  double lo = 0.0;
  double hi = 0.0;
};

/// K and its first four derivatives at s.
struct CgfEval {
  double s = 0.0;
  double K = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
  double K3 = 0.0;
  double K4 = 0.0;
};

struct SaddlepointSolution {
  double s_hat = 0.0;
  double w_hat = 0.0;
  double u_hat = 0.0;
  CgfEval cgf_at_shat;
};

enum class Branch { regular, mean, outside };

std::string_view to_string(Branch b);

/// Lugannani-Rice approximation to P(R <= r). `upper` approximates
/// P(R > r) directly, which keeps precision in the right tail.
struct CdfApprox {
  double value = 0.0;
  double upper = 0.0;
  Branch branch = Branch::regular;
  std::optional<SaddlepointSolution> solution;
};

struct DensityApprox {
  double value = 0.0;
  double log_value = 0.0;
  double J = 0.0;
  Branch branch = Branch::regular;
  std::optional<SaddlepointSolution> solution;
};

/// Eigenvalues with magnitude at most this are treated as zero when deciding
/// the strip and whether r lies inside the support.
double eigenvalue_floor(const Vector& lambdas);

/// Throws InvalidInput for an all-zero spectrum.
Strip strip(const SpectrumAtR& spectrum);

/// Throws InvalidInput when s is outside the strip.
CgfEval cgf(const SpectrumAtR& spectrum, double s);

/// Root of K1 in the strip by safeguarded Newton. Throws UnsupportedInstance
/// when K1 has no sign change (r outside the open support).
SaddlepointSolution solve_saddlepoint(const SpectrumAtR& spectrum, const Tolerances& tol = {});

/// Outside the open support the value is exactly 0 or 1 with Branch::outside.
CdfApprox cdf(const QuadFormRatio& ratio, double r);

/// Zero with Branch::outside outside the open support.
DensityApprox pdf(const QuadFormRatio& ratio, double r);

/// Integral of the saddlepoint density over the support.
double saddlepoint_mass(const QuadFormRatio& ratio);

/// Saddlepoint density divided by saddlepoint_mass(), at each grid point.
std::vector<double> normalized_pdf(const QuadFormRatio& ratio, const std::vector<double>& grid);

namespace detail {

/// Phi(w) + phi(w)(1/w - 1/u) and its complement.
std::pair<double, double> lugannani_rice_regular(double w, double u);

/// Expansion of the regular branch about w = 0, using cumulants at s = 0.
std::pair<double, double> lugannani_rice_mean(double w, const CgfEval& at_zero);

}  // namespace detail

}  // namespace qfratio
