#include "qfratio/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "qfratio/errors.hpp"

namespace qfratio {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
using Gauss = boost::math::quadrature::gauss<double, 15>;

struct Panel {
  double a, b, value, error, l1;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel evaluate(const std::function<double(double)>& f, double a, double b) {
  const auto& x = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double f0 = f(mid);
  double kronrod = wk[0] * f0;
  double gauss = wg[0] * f0;
  double l1 = wk[0] * std::abs(f0);
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fl = f(mid - half * x[i]);
    const double fr = f(mid + half * x[i]);
    kronrod += wk[i] * (fl + fr);
    l1 += wk[i] * (std::abs(fl) + std::abs(fr));
    if (i % 2 == 0) gauss += wg[i / 2] * (fl + fr);
  }
  return {a, b, half * kronrod, std::abs(half * (kronrod - gauss)), std::abs(half) * l1};
}

QuadResult integrate_finite(const std::function<double(double)>& f, double a, double b,
                            const QuadOptions& opt) {
  std::priority_queue<Panel> panels;
  panels.push(evaluate(f, a, b));
  double value = panels.top().value;
  double error = panels.top().error;
  double l1 = panels.top().l1;

  int count = 1;
  while (true) {
    if (!std::isfinite(value) || !std::isfinite(error)) {
      throw NumericalFailure("quadrature: integrand is not finite");
    }
    if (error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) break;
    if (count >= opt.max_intervals) {
      std::ostringstream msg;
      msg << "quadrature did not converge on [" << a << ", " << b << "]: value " << value
          << ", error " << error;
      throw NumericalFailure(msg.str());
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = evaluate(f, worst.a, mid);
    const Panel right = evaluate(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    panels.push(left);
    panels.push(right);
    ++count;
  }

  // Re-sum to shed the drift of the running updates.
  value = error = l1 = 0.0;
  while (!panels.empty()) {
    value += panels.top().value;
    error += panels.top().error;
    l1 += panels.top().l1;
    panels.pop();
  }
  return {value, error, l1};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt) {
  if (std::isnan(a) || std::isnan(b)) throw InvalidInput("quadrature: NaN endpoint");
  if (a == b) return {};
  if (a > b) {
    QuadResult r = integrate(f, b, a, opt);
    r.value = -r.value;
    return r;
  }
  const bool lo_inf = std::isinf(a);
  const bool hi_inf = std::isinf(b);
  if (lo_inf && hi_inf) {
    // x = t / (1 - t^2) on (-1, 1)
    return integrate_finite(
        [&f](double t) {
          const double d = 1.0 - t * t;
          return f(t / d) * (1.0 + t * t) / (d * d);
        },
        -1.0, 1.0, opt);
  }
  if (hi_inf) {
    // x = a + t / (1 - t) on (0, 1)
    return integrate_finite(
        [&f, a](double t) {
          const double d = 1.0 - t;
          return f(a + t / d) / (d * d);
        },
        0.0, 1.0, opt);
  }
  if (lo_inf) {
    return integrate_finite(
        [&f, b](double t) {
          const double d = 1.0 - t;
          return f(b - t / d) / (d * d);
        },
        0.0, 1.0, opt);
  }
  return integrate_finite(f, a, b, opt);
}

}  // namespace qfratio
