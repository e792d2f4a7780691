#include "qfratio/tail_limits.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qfratio/errors.hpp"
#include "qfratio/specfun.hpp"

namespace qfratio {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBracket = 1e-12;
constexpr double kD0Tol = 1e-12;

// Left side of the t0 equation and its derivative in t.
struct T0Equation {
  int n;
  const Vector& omega;
  const Vector& nu0;

  double operator()(double t, double* deriv) const {
    const double df = static_cast<double>(n - omega.size());
    double f = -df / (2.0 * t);
    double d = df / (2.0 * t * t);
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
      const double w = omega(i);
      const double q = 1.0 / (1.0 - 2.0 * t * w);
      const double v2 = nu0(i) * nu0(i);
      f += w * q * (1.0 + v2 * q);
      d += 2.0 * w * w * q * q * (1.0 + 2.0 * v2 * q);
    }
    *deriv = d;
    return f;
  }
};

double solve_t0(const T0Equation& eq) {
  double a = kBracket;
  double b = 0.5 - kBracket;
  double d = 0.0;
  if (!(eq(a, &d) < 0.0 && eq(b, &d) > 0.0)) {
    throw InvalidInput("edge data admit no t0 in (0, 1/2)");
  }
  double t = 0.25;
  for (int iter = 0; iter < 500; ++iter) {
    const double f = eq(t, &d);
    if (f == 0.0) return t;
    (f > 0.0 ? b : a) = t;
    double next = t - f / d;
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - t) <= 1e-16 * t || b - a <= 1e-16 * b) return next;
    t = next;
  }
  throw NumericalFailure("t0 root finder did not converge");
}

void validate_edge(int n, const EdgeStructure& edge) {
  const Eigen::Index m = edge.m;
  if (m < 1 || m > n - 1) {
    throw InvalidInput("edge multiplicity must satisfy 1 <= m <= n-1, got m = " +
                       std::to_string(m));
  }
  if (edge.omega.size() != m || edge.nu0.size() != m || edge.H_edge.rows() != m ||
      edge.H_edge.cols() != m) {
    throw InvalidInput("edge data sizes do not match the multiplicity");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(edge.omega(i) >= 0.0 && edge.omega(i) <= 1.0)) {
      throw InvalidInput("edge rates must lie in [0, 1]");
    }
    if (i > 0 && edge.omega(i) < edge.omega(i - 1)) {
      throw InvalidInput("edge rates must be sorted ascending");
    }
  }
  if (edge.omega(m - 1) != 1.0) throw InvalidInput("largest edge rate must equal 1");
  if (!edge.nu0.allFinite() || !edge.H_edge.allFinite()) {
    throw InvalidInput("edge data must be finite");
  }
}

}  // namespace

TailLimitSimple limit_simple(int n, double nu0) {
  if (n < 2) throw InvalidInput("limit_simple needs n >= 2");
  if (!std::isfinite(nu0)) throw InvalidInput("limit_simple needs finite nu0");
  const double nd = n;
  const double v2 = nu0 * nu0;
  const double c = 2.0 * nd - 1.0 + v2;

  TailLimitSimple out;
  out.t0 = (nd - 1.0) / (c + std::sqrt(c * c - 4.0 * nd * (nd - 1.0)));
  const double q = 1.0 / (1.0 - 2.0 * out.t0);
  out.u0 = std::sqrt((nd - 1.0) / 2.0 + 2.0 * out.t0 * out.t0 * q * q * (1.0 + 2.0 * v2 * q));
  out.eta2 = 0.5 * v2 * q;
  const double log_re = 0.5 * std::log(kTwoPi / q) + 0.5 * (nd - 1.0) * std::log(2.0 * out.t0) +
                        std::log(out.u0) - out.eta2 - ln_beta(0.5, 0.5 * (nd + 1.0)) -
                        std::log(0.5 * nd) + log_hyp1f1(0.5 * nd, 0.5, 0.5 * v2);
  out.RE = std::exp(log_re);
  return out;
}

TailLimitMultiple limit_multiple(int n, const EdgeStructure& edge) {
  validate_edge(n, edge);
  const Eigen::Index m = edge.m;
  const Vector& w = edge.omega;
  const Vector& nu = edge.nu0;
  const Matrix& h = edge.H_edge;

  TailLimitMultiple out;
  out.t0 = solve_t0(T0Equation{n, w, nu});
  const double t0 = out.t0;
  const Vector q = (1.0 - 2.0 * t0 * w.array()).inverse().matrix();

  double acc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    acc += w(i) * w(i) * q(i) * q(i) * (1.0 + 2.0 * nu(i) * nu(i) * q(i));
  }
  out.u0 = std::sqrt(0.5 * static_cast<double>(n - m) + 2.0 * t0 * t0 * acc);
  out.eta1 = t0 * w.cwiseProduct(q) / out.u0;
  out.eta2 = 0.5 * nu.cwiseAbs2().cwiseProduct(q);
  out.eta3 = q;

  Chi2Combo base;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (out.eta1(i) > 0.0) base.terms.push_back({out.eta1(i), 1, 2.0 * out.eta2(i)});
  }
  const double neg_weight = -0.5 / out.u0;
  const int rest = static_cast<int>(n - m);

  Chi2Combo cdf_combo = base;
  cdf_combo.terms.push_back({neg_weight, rest + 2, 0.0});
  out.RE_cdf = std::sqrt(kTwoPi) * density_at_zero(cdf_combo, kD0Tol);

  // Each term of the density limit is coefficient * D0(combo). Terms whose
  // coefficient vanishes are skipped, since their combination may lack an
  // integrable characteristic function.
  const Vector a = nu.cwiseProduct(q);
  out.W_J = h.diagonal().dot(q) + a.dot(h * a);
  if (!(out.W_J > 0.0)) throw NumericalFailure("limiting Jacobian W_J is not positive");
  const double coef_floor = 1e-12 * out.W_J;

  const auto d0 = [&](double coef, std::initializer_list<Eigen::Index> extra) {
    if (std::abs(coef) <= coef_floor) return 0.0;
    Chi2Combo combo = base;
    for (Eigen::Index k : extra) combo.terms.push_back({out.eta1(k), 2, 0.0});
    combo.terms.push_back({neg_weight, rest, 0.0});
    return coef * density_at_zero(combo, kD0Tol);
  };
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) sum += d0(h(i, i) * q(i), {i});
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) sum += d0(a(i) * a(j) * h(i, j), {i, j});
  }
  out.RE_pdf = std::sqrt(kTwoPi) * sum / out.W_J;
  return out;
}

BetaLimit beta_limit(int n, int m, double theta) {
  if (m < 1 || n - m < 1) throw InvalidInput("beta_limit needs 1 <= m <= n-1");
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw InvalidInput("beta_limit needs finite theta >= 0");
  }
  const double nd = n;
  const double md = m;
  const double d = theta - md;
  const double root = std::sqrt(d * d + 4.0 * theta * nd);
  // root - d without cancellation when d > 0.
  const double gap = d > 0.0 ? 4.0 * theta * nd / (root + d) : root - d;

  BetaLimit out;
  out.theta = theta;
  out.t0 = 0.5 - gap / (4.0 * nd);
  const double one_minus = gap / (2.0 * nd);  // 1 - 2 t0
  const double q = 1.0 / one_minus;
  out.u0 = std::sqrt(0.5 * (nd - md) +
                     2.0 * out.t0 * out.t0 * (md * q * q + 2.0 * theta * q * q * q));
  out.eta2 = 0.5 * theta * q;
  const double log_re = 0.5 * std::log(kTwoPi) + 0.5 * md * std::log(one_minus) +
                        0.5 * (nd - md) * std::log(2.0 * out.t0) + std::log(out.u0) - out.eta2 -
                        ln_beta(0.5 * md, 0.5 * (nd - md)) - std::log(0.5 * (nd - md)) +
                        log_hyp1f1(0.5 * nd, 0.5 * md, 0.5 * theta);
  out.RE = std::exp(log_re);
  return out;
}

double central_ratio(double a, double b) {
  return std::exp(log_stirling_beta_hat(a, b) - ln_beta(a, b));
}

}  // namespace qfratio
