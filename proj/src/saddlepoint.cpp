#include "qfratio/saddlepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qfratio/errors.hpp"
#include "qfratio/quadrature.hpp"
#include "qfratio/specfun.hpp"
#include "qfratio/support.hpp"

namespace qfratio {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// ln(1 - x) + x / (1 - x), which is >= 0 for x < 1.
double g_term(double x) {
  if (std::abs(x) < 0.05) {
    double sum = 0.0;
    double power = x * x;
    for (int k = 2; k < 40; ++k) {
      const double term = (k - 1.0) / k * power;
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      power *= x;
    }
    return sum;
  }
  return std::log1p(-x) + x / (1.0 - x);
}

// |K1| counted term by term; the scale for the root tolerance.
double k1_scale(const SpectrumAtR& sp, double s) {
  double scale = 0.0;
  for (Eigen::Index i = 0; i < sp.lambdas.size(); ++i) {
    const double l = sp.lambdas(i);
    const double q = 1.0 / (1.0 - 2.0 * s * l);
    scale += std::abs(l) * q * (1.0 + sp.nu(i) * sp.nu(i) * q);
  }
  return scale;
}

// -2K(s_hat) as a sum of non-negative terms plus the root residual.
double w_squared(const SpectrumAtR& sp, const CgfEval& c) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < sp.lambdas.size(); ++i) {
    const double x = 2.0 * c.s * sp.lambdas(i);
    const double nu2 = sp.nu(i) * sp.nu(i);
    const double y = x / (1.0 - x);
    sum += g_term(x) + nu2 * y * y;
  }
  return std::max(0.0, sum - 2.0 * c.s * c.K1);
}

enum class Position { below, inside, above };

// Where r sits relative to the open support, judged from the signs of the
// pencil eigenvalues.
Position locate(const SpectrumAtR& sp) {
  const double floor = eigenvalue_floor(sp.lambdas);
  const bool has_neg = sp.lambdas.minCoeff() < -floor;
  const bool has_pos = sp.lambdas.maxCoeff() > floor;
  if (has_neg && has_pos) return Position::inside;
  if (!has_neg && !has_pos) {
    throw UnsupportedInstance("pencil vanishes at r; the ratio is degenerate");
  }
  // X_r >= 0 a.s. means R >= r a.s.
  return has_pos ? Position::below : Position::above;
}

}  // namespace

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::regular:
      return "regular";
    case Branch::mean:
      return "mean";
    case Branch::outside:
      return "outside";
  }
  return "unknown";
}

double eigenvalue_floor(const Vector& lambdas) {
  return 64.0 * kEps * static_cast<double>(lambdas.size()) * lambdas.cwiseAbs().maxCoeff();
}

Strip strip(const SpectrumAtR& spectrum) {
  const Vector& l = spectrum.lambdas;
  if (l.size() == 0 || l.cwiseAbs().maxCoeff() == 0.0) {
    throw InvalidInput("strip: all eigenvalues are zero");
  }
  const double floor = eigenvalue_floor(l);
  Strip out;
  out.lo = l.minCoeff() < -floor ? 0.5 / l.minCoeff() : -kInf;
  out.hi = l.maxCoeff() > floor ? 0.5 / l.maxCoeff() : kInf;
  return out;
}

CgfEval cgf(const SpectrumAtR& spectrum, double s) {
  CgfEval c;
  c.s = s;
  for (Eigen::Index i = 0; i < spectrum.lambdas.size(); ++i) {
    const double l = spectrum.lambdas(i);
    const double nu2 = spectrum.nu(i) * spectrum.nu(i);
    const double x = 2.0 * s * l;
    if (!(x < 1.0)) throw InvalidInput("cgf: s lies outside the strip");
    const double q = 1.0 / (1.0 - x);
    const double lq = l * q;
    c.K += -0.5 * std::log1p(-x) + 0.5 * x * nu2 * q;
    c.K1 += lq * (1.0 + nu2 * q);
    c.K2 += 2.0 * lq * lq * (1.0 + 2.0 * nu2 * q);
    c.K3 += 8.0 * lq * lq * lq * (1.0 + 3.0 * nu2 * q);
    c.K4 += 48.0 * lq * lq * lq * lq * (1.0 + 4.0 * nu2 * q);
  }
  return c;
}

SaddlepointSolution solve_saddlepoint(const SpectrumAtR& spectrum, const Tolerances& tol) {
  const Strip st = strip(spectrum);
  if (!std::isfinite(st.lo) || !std::isfinite(st.hi)) {
    throw UnsupportedInstance("saddlepoint equation has no root: r is outside the open support");
  }
  double a = st.lo * (1.0 - 1e-12);
  double b = st.hi * (1.0 - 1e-12);

  double s = 0.0;
  CgfEval c = cgf(spectrum, s);
  bool converged = false;
  for (int iter = 0; iter < 1000; ++iter) {
    if (std::abs(c.K1) <= tol.tol_root * k1_scale(spectrum, s)) {
      converged = true;
      break;
    }
    (c.K1 > 0.0 ? b : a) = s;
    if (b - a <= 4.0 * kEps * std::max(std::abs(a), std::abs(b))) {
      converged = true;
      break;
    }
    double next = s - c.K1 / c.K2;
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    s = next;
    c = cgf(spectrum, s);
  }
  if (!converged) throw NumericalFailure("saddlepoint root finder did not converge");

  SaddlepointSolution sol;
  sol.s_hat = s;
  sol.cgf_at_shat = c;
  const double w = std::sqrt(w_squared(spectrum, c));
  sol.w_hat = s > 0.0 ? w : (s < 0.0 ? -w : 0.0);
  sol.u_hat = s * std::sqrt(c.K2);
  return sol;
}

namespace detail {

std::pair<double, double> lugannani_rice_regular(double w, double u) {
  const double corr = normal_pdf(w) * (1.0 / w - 1.0 / u);
  return {normal_cdf(w) + corr, normal_cdf(-w) - corr};
}

std::pair<double, double> lugannani_rice_mean(double w, const CgfEval& at_zero) {
  const double rho3 = at_zero.K3 / std::pow(at_zero.K2, 1.5);
  const double rho4 = at_zero.K4 / (at_zero.K2 * at_zero.K2);
  const double phi0 = normal_pdf(0.0);
  const double lower =
      0.5 + phi0 * rho3 / 6.0 + w * phi0 * (1.0 + rho4 / 8.0 - 5.0 * rho3 * rho3 / 24.0);
  return {lower, 1.0 - lower};
}

}  // namespace detail

CdfApprox cdf(const QuadFormRatio& ratio, double r) {
  if (std::isnan(r)) throw InvalidInput("cdf: r is NaN");
  CdfApprox out;
  if (std::isinf(r)) {
    out.branch = Branch::outside;
    (r > 0 ? out.value : out.upper) = 1.0;
    return out;
  }
  const SpectrumAtR sp = spectrum_at(ratio, r);
  const Position pos = locate(sp);
  if (pos != Position::inside) {
    out.branch = Branch::outside;
    (pos == Position::above ? out.value : out.upper) = 1.0;
    return out;
  }
  const SaddlepointSolution sol = solve_saddlepoint(sp, ratio.tolerances());
  out.solution = sol;
  std::pair<double, double> tails;
  if (std::abs(sol.w_hat) < ratio.tolerances().mean_branch_threshold) {
    out.branch = Branch::mean;
    tails = detail::lugannani_rice_mean(sol.w_hat, cgf(sp, 0.0));
  } else {
    out.branch = Branch::regular;
    tails = detail::lugannani_rice_regular(sol.w_hat, sol.u_hat);
  }
  out.value = tails.first;
  out.upper = tails.second;
  return out;
}

DensityApprox pdf(const QuadFormRatio& ratio, double r) {
  if (std::isnan(r)) throw InvalidInput("pdf: r is NaN");
  DensityApprox out;
  out.log_value = -kInf;
  if (std::isinf(r)) {
    out.branch = Branch::outside;
    return out;
  }
  const SpectrumAtR sp = spectrum_at(ratio, r);
  if (locate(sp) != Position::inside) {
    out.branch = Branch::outside;
    return out;
  }
  const SaddlepointSolution sol = solve_saddlepoint(sp, ratio.tolerances());
  out.solution = sol;
  out.branch = Branch::regular;

  const Vector q = (1.0 - 2.0 * sol.s_hat * sp.lambdas.array()).inverse().matrix();
  const Vector a = sp.nu.cwiseProduct(q);
  out.J = sp.H.diagonal().dot(q) + a.dot(sp.H * a);
  if (out.J > 0.0) {
    const CgfEval& c = sol.cgf_at_shat;
    out.log_value = std::log(out.J) + c.K - 0.5 * std::log(2.0 * std::numbers::pi * c.K2);
    out.value = std::exp(out.log_value);
  }
  return out;
}

double saddlepoint_mass(const QuadFormRatio& ratio) {
  const SupportInfo info = support(ratio);
  const auto f = [&ratio](double r) { return pdf(ratio, r).value; };
  const QuadOptions opt{ratio.tolerances().tol_quad, 0.0, 8000};
  double mass = 0.0;
  if (std::isfinite(info.l) && std::isfinite(info.r_bar)) {
    mass = integrate(f, info.l, info.r_bar, opt).value;
  } else {
    // Split at a finite interior point so each half has one mapped end.
    double mid = 0.0;
    if (std::isfinite(info.l)) mid = info.l + 1.0;
    if (std::isfinite(info.r_bar)) mid = info.r_bar - 1.0;
    mass = integrate(f, info.l, mid, opt).value + integrate(f, mid, info.r_bar, opt).value;
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw NumericalFailure("saddlepoint density does not integrate to a positive mass");
  }
  return mass;
}

std::vector<double> normalized_pdf(const QuadFormRatio& ratio, const std::vector<double>& grid) {
  const double mass = saddlepoint_mass(ratio);
  std::vector<double> out;
  out.reserve(grid.size());
  for (double r : grid) out.push_back(pdf(ratio, r).value / mass);
  return out;
}

}  // namespace qfratio
