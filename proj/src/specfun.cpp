#include "qfratio/specfun.hpp"

#include <algorithm>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qfratio/errors.hpp"
#include "qfratio/quadrature.hpp"

namespace qfratio {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))
constexpr double kSeriesSwitch = 60.0;

// Kummer series for a, b, z > 0 with the running sum kept as sum * e^log_scale.
double log_kummer_series(double a, double b, double z) {
  constexpr double kRescale = 1e250;
  double sum = 1.0;
  double term = 1.0;
  double log_scale = 0.0;
  for (long k = 0; k < 10'000'000; ++k) {
    const double kd = static_cast<double>(k);
    term *= (a + kd) / (b + kd) * z / (kd + 1.0);
    sum += term;
    if (sum > kRescale) {
      sum /= kRescale;
      term /= kRescale;
      log_scale += std::log(kRescale);
    }
    const bool past_peak = (a + kd + 1.0) * z < (b + kd + 1.0) * (kd + 2.0);
    if (past_peak && term <= 1e-17 * sum) return log_scale + std::log(sum);
  }
  throw NumericalFailure("1F1 Kummer series did not converge");
}

// Signed Kummer series, for the cases the log form does not cover.
double kummer_series(double a, double b, double z) {
  double sum = 1.0;
  double term = 1.0;
  for (long k = 0; k < 100'000; ++k) {
    const double kd = static_cast<double>(k);
    term *= (a + kd) / (b + kd) * z / (kd + 1.0);
    sum += term;
    if (term == 0.0) return sum;
    const bool past_peak = std::abs((a + kd + 1.0) * z) < std::abs((b + kd + 1.0) * (kd + 2.0));
    if (past_peak && std::abs(term) <= 1e-17 * std::abs(sum)) return sum;
  }
  throw NumericalFailure("1F1 Kummer series did not converge");
}

// Dominant part of the large-z expansion for real z > 0:
// 1F1 ~ Gamma(b)/Gamma(a) e^z z^(a-b) sum_k (b-a)_k (1-a)_k / (k! z^k).
// Returns false when the asymptotic series does not reach double precision.
bool log_kummer_asymptotic(double a, double b, double z, double& out) {
  double sum = 1.0;
  double term = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int k = 0; k < 200; ++k) {
    const double kd = static_cast<double>(k);
    term *= (b - a + kd) * (1.0 - a + kd) / ((kd + 1.0) * z);
    if (std::abs(term) > previous) break;
    sum += term;
    previous = std::abs(term);
    if (std::abs(term) <= 1e-17 * std::abs(sum)) {
      converged = true;
      break;
    }
  }
  if (!converged || !(sum > 0.0)) return false;
  out = std::lgamma(b) - std::lgamma(a) + z + (a - b) * std::log(z) + std::log(sum);
  return true;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidInput(std::string(what) + " must be finite and > 0");
  }
}

struct CfParts {
  double log_modulus;
  double phase;
};

// log|phi(t)| and arg phi(t) for phi the characteristic function.
CfParts cf_parts(const Chi2Combo& combo, double t) {
  double lm = 0.0;
  double ph = 0.0;
  for (const Chi2Term& term : combo.terms) {
    const double wt = 2.0 * term.weight * t;
    const double q = 1.0 + wt * wt;
    lm += -0.25 * term.df * std::log1p(wt * wt) -
          0.5 * term.noncentrality * wt * wt / q;
    ph += 0.5 * term.df * std::atan(wt) + 0.5 * term.noncentrality * wt / q;
  }
  return {lm, ph};
}

double max_abs_weight(const Chi2Combo& combo) {
  double w = 0.0;
  for (const Chi2Term& term : combo.terms) w = std::max(w, std::abs(term.weight));
  return w;
}

void validate_combo(const Chi2Combo& combo) {
  if (combo.terms.empty()) throw InvalidInput("chi-square combination has no terms");
  for (const Chi2Term& term : combo.terms) {
    if (!std::isfinite(term.weight)) throw InvalidInput("chi-square weight must be finite");
    if (term.df < 1) throw InvalidInput("chi-square degrees of freedom must be >= 1");
    if (!(term.noncentrality >= 0.0) || !std::isfinite(term.noncentrality)) {
      throw InvalidInput("chi-square noncentrality must be finite and >= 0");
    }
  }
  if (max_abs_weight(combo) == 0.0) {
    throw InvalidInput("chi-square combination has only zero weights");
  }
}

}  // namespace

double log_hyp1f1(double a, double b, double z) {
  require_positive(a, "1F1 parameter a");
  require_positive(b, "1F1 parameter b");
  if (!(z >= 0.0) || !std::isfinite(z)) throw InvalidInput("log_hyp1f1 requires finite z >= 0");
  if (z == 0.0) return 0.0;
  if (z > kSeriesSwitch) {
    double out = 0.0;
    if (log_kummer_asymptotic(a, b, z, out)) return out;
  }
  return log_kummer_series(a, b, z);
}

double hyp1f1(double a, double b, double z) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(z)) {
    throw InvalidInput("1F1 arguments must be finite");
  }
  if (b <= 0.0 && b == std::floor(b)) {
    throw InvalidInput("1F1 parameter b must not be a non-positive integer");
  }
  if (z < 0.0) return std::exp(z) * hyp1f1(b - a, b, -z);
  if (a > 0.0 && b > 0.0) {
    const double log_value = log_hyp1f1(a, b, z);
    if (log_value > std::log(std::numeric_limits<double>::max())) {
      throw NumericalFailure("1F1 overflows; use log_hyp1f1");
    }
    return std::exp(log_value);
  }
  if (z > kSeriesSwitch) {
    throw NumericalFailure("1F1 with non-positive parameters is limited to z <= 60");
  }
  return kummer_series(a, b, z);
}

double ln_beta(double a, double b) {
  require_positive(a, "beta argument a");
  require_positive(b, "beta argument b");
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_stirling_gamma_hat(double x) {
  require_positive(x, "Stirling gamma argument");
  return kLogSqrt2Pi + (x - 0.5) * std::log(x) - x;
}

double stirling_gamma_hat(double x) { return std::exp(log_stirling_gamma_hat(x)); }

double log_stirling_beta_hat(double a, double b) {
  require_positive(a, "Stirling beta argument a");
  require_positive(b, "Stirling beta argument b");
  return kLogSqrt2Pi + (a - 0.5) * std::log(a) + (b - 0.5) * std::log(b) -
         (a + b - 0.5) * std::log(a + b);
}

double stirling_beta_hat(double a, double b) { return std::exp(log_stirling_beta_hat(a, b)); }

double erf(double x) { return std::erf(x); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

int Chi2Combo::total_df() const {
  int k = 0;
  for (const Chi2Term& term : terms) {
    if (term.weight != 0.0) k += term.df;
  }
  return k;
}

std::complex<double> characteristic_function(const Chi2Combo& combo, double t) {
  validate_combo(combo);
  const CfParts p = cf_parts(combo, t);
  return std::polar(std::exp(p.log_modulus), p.phase);
}

double density_at_zero(const Chi2Combo& combo, double tol) {
  validate_combo(combo);
  require_positive(tol, "density_at_zero tolerance");
  if (combo.total_df() < 3) {
    throw InvalidInput("density_at_zero needs total degrees of freedom >= 3");
  }
  bool has_pos = false;
  bool has_neg = false;
  for (const Chi2Term& term : combo.terms) {
    has_pos = has_pos || term.weight > 0.0;
    has_neg = has_neg || term.weight < 0.0;
  }
  if (!(has_pos && has_neg)) return 0.0;

  const auto re_phi = [&combo](double t) {
    const CfParts p = cf_parts(combo, t);
    return std::exp(p.log_modulus) * std::cos(p.phase);
  };
  // [0, T0] directly, [T0, inf) through t = T0 / y^2.
  const double t0 = 25.0 / max_abs_weight(combo);
  const QuadOptions opt{tol, 1e-3 * tol, 4000};
  const QuadResult head = integrate(re_phi, 0.0, t0, opt);
  const QuadResult tail = integrate(
      [&](double y) { return re_phi(t0 / (y * y)) * 2.0 * t0 / (y * y * y); }, 0.0, 1.0, opt);
  return std::max(0.0, (head.value + tail.value) / kPi);
}

TailPair imhof_tails(const Chi2Combo& combo, double x, double tol) {
  validate_combo(combo);
  require_positive(tol, "Imhof tolerance");
  if (!std::isfinite(x)) {
    TailPair out;
    (x > 0 ? out.lower : out.upper) = 1.0;
    return out;
  }

  // Imhof (1961): P(X <= x) = 1/2 - (1/pi) int_0^inf sin(theta(u)) / (u rho(u)) du.
  const auto alpha = [&combo](double u) {
    double a = 0.0;
    for (const Chi2Term& term : combo.terms) {
      const double wu = term.weight * u;
      a += term.df * std::atan(wu) + term.noncentrality * wu / (1.0 + wu * wu);
    }
    return 0.5 * a;
  };
  const auto envelope = [&combo](double u) {
    double lr = 0.0;
    for (const Chi2Term& term : combo.terms) {
      const double wu2 = term.weight * term.weight * u * u;
      lr += 0.25 * term.df * std::log1p(wu2) + 0.5 * term.noncentrality * wu2 / (1.0 + wu2);
    }
    return std::exp(-lr) / u;
  };
  const double omega = 0.5 * x;
  const auto integrand = [&](double u) { return std::sin(alpha(u) - omega * u) * envelope(u); };

  const double u0 = 50.0 / max_abs_weight(combo);
  const QuadOptions opt{1e-12, 0.25 * tol * kPi, 4000};
  double total = integrate(integrand, 0.0, u0, opt).value;

  if (omega == 0.0) {
    total += integrate([&](double y) { return integrand(u0 / (y * y)) * 2.0 * u0 / (y * y * y); },
                       0.0, 1.0, opt)
                 .value;
  } else {
    // With u = u0 + v: sin(alpha - omega u) =
    //   sin(alpha - omega u0) cos(omega v) - cos(alpha - omega u0) sin(omega v).
    const double w = std::abs(omega);
    const double sign = omega > 0.0 ? 1.0 : -1.0;
    const auto cos_part = [&](double v) {
      return std::sin(alpha(u0 + v) - omega * u0) * envelope(u0 + v);
    };
    const auto sin_part = [&](double v) {
      return std::cos(alpha(u0 + v) - omega * u0) * envelope(u0 + v);
    };
    boost::math::quadrature::ooura_fourier_cos<double> fcos(1e-10);
    boost::math::quadrature::ooura_fourier_sin<double> fsin(1e-10);
    const auto [c_val, c_err] = fcos.integrate(cos_part, w);
    const auto [s_val, s_err] = fsin.integrate(sin_part, w);
    const double tail = c_val - sign * s_val;
    const double tail_err = c_err * std::abs(c_val) + s_err * std::abs(s_val);
    if (!std::isfinite(tail) || tail_err > 0.25 * tol * kPi) {
      throw NumericalFailure("Imhof tail integral did not converge");
    }
    total += tail;
  }

  TailPair out;
  out.lower = std::clamp(0.5 - total / kPi, 0.0, 1.0);
  out.upper = std::clamp(0.5 + total / kPi, 0.0, 1.0);
  return out;
}

double imhof_cdf(const Chi2Combo& combo, double x, double tol) {
  return imhof_tails(combo, x, tol).lower;
}

}  // namespace qfratio
