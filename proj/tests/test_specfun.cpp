#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "qfratio/errors.hpp"
#include "qfratio/oracle.hpp"
#include "qfratio/specfun.hpp"

using namespace qfratio;

namespace {

Chi2Combo random_mixed_combo(std::mt19937_64& rng, int terms) {
  std::uniform_real_distribution<double> w(0.2, 2.0);
  std::uniform_int_distribution<int> df(1, 3);
  std::uniform_real_distribution<double> nc(0.0, 2.0);
  Chi2Combo c;
  for (int i = 0; i < terms; ++i) {
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    c.terms.push_back({sign * w(rng), df(rng), i % 3 == 0 ? 0.0 : nc(rng)});
  }
  return c;
}

}  // namespace

TEST_CASE("hyp1f1 examples") {
  CHECK(hyp1f1(2.5, 0.5, 0.0) == 1.0);
  CHECK(hyp1f1(1, 1, 3) == doctest::Approx(std::exp(3.0)).epsilon(1e-12));
  // Partial sums of z^k / (1/2)_k.
  double sum = 0.0, term = 1.0;
  for (int k = 0; k < 60; ++k) {
    sum += term;
    term *= 2.0 / (0.5 + k);
  }
  CHECK(hyp1f1(1, 0.5, 2) == doctest::Approx(sum).epsilon(1e-13));
  CHECK(hyp1f1(1, 0.5, 2) == doctest::Approx(18.68).epsilon(1e-3));
}

TEST_CASE("hyp1f1 agrees with Boost on both sides of the branch switch") {
  for (double a : {0.5, 1.0, 2.5, 4.0}) {
    for (double b : {0.5, 1.5, 3.0}) {
      for (double z = 50.0; z <= 70.0; z += 0.5) {
        const double ref = boost::math::hypergeometric_1F1(a, b, z);
        CHECK(hyp1f1(a, b, z) == doctest::Approx(ref).epsilon(1e-8));
        CHECK(log_hyp1f1(a, b, z) == doctest::Approx(std::log(ref)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("hyp1f1 on moderate and negative arguments") {
  for (double z : {-30.0, -3.0, 0.1, 5.0, 25.0}) {
    const double ref = boost::math::hypergeometric_1F1(1.5, 2.5, z);
    CHECK(hyp1f1(1.5, 2.5, z) == doctest::Approx(ref).epsilon(1e-10));
  }
  // Far beyond double range only the logarithm survives.
  CHECK_THROWS_AS(hyp1f1(1, 0.5, 2000), NumericalFailure);
  CHECK(log_hyp1f1(1, 0.5, 2000) ==
        doctest::Approx(2000 + std::log(std::sqrt(std::numbers::pi) * std::sqrt(2000.0)))
            .epsilon(1e-6));
}

TEST_CASE("beta, gamma and Stirling forms") {
  CHECK(std::exp(ln_beta(0.5, 0.5)) == doctest::Approx(std::numbers::pi));
  CHECK(stirling_beta_hat(0.5, 0.5) == doctest::Approx(std::sqrt(2 * std::numbers::pi)));
  CHECK(std::abs(stirling_gamma_hat(10) / std::tgamma(10) - 1) <= 1e-2);
  CHECK(stirling_gamma_hat(3.0) ==
        doctest::Approx(std::sqrt(2 * std::numbers::pi) * std::pow(3.0, 2.5) * std::exp(-3.0)));
  CHECK(ln_beta(2.0, 3.0) == doctest::Approx(std::log(1.0 / 12.0)));
  CHECK(std::abs(ln_beta(1e-3, 1e-3) - std::log(2000.0)) < 1e-5);
  CHECK_THROWS_AS(ln_beta(-1.0, 1.0), InvalidInput);
}

TEST_CASE("erf and the normal distribution") {
  CHECK(qfratio::erf(0.0) == 0.0);
  CHECK(qfratio::erf(INFINITY) == 1.0);
  CHECK(qfratio::erf(-INFINITY) == -1.0);
  for (double x : {-2.0, -0.3, 0.7, 1.9}) {
    CHECK(std::abs(qfratio::erf(x) - std::erf(x)) <= 1e-14);
  }
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(-37.0) == doctest::Approx(0.5 * std::erfc(37.0 / std::sqrt(2.0))).epsilon(1e-12));
  CHECK(normal_pdf(0.0) == doctest::Approx(1 / std::sqrt(2 * std::numbers::pi)));
}

TEST_CASE("characteristic function sanity") {
  std::mt19937_64 rng(301);
  const auto c = random_mixed_combo(rng, 4);
  CHECK(std::abs(characteristic_function(c, 0.0) - 1.0) == 0.0);
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double mod = std::abs(characteristic_function(Chi2Combo{{{1.0, 3, 0.0}, {-0.5, 2, 0.0}}}, 0.1 * k));
    CHECK(mod < prev);
    prev = mod;
  }
  // Conjugate symmetry.
  const auto p = characteristic_function(c, 0.8);
  const auto m = characteristic_function(c, -0.8);
  CHECK(std::abs(p - std::conj(m)) <= 1e-15);
}

TEST_CASE("density at zero examples") {
  const Chi2Combo laplace{{{0.5, 2, 0.0}, {-0.5, 2, 0.0}}};
  CHECK(std::abs(density_at_zero(laplace) - 0.5) <= 1e-8);
  CHECK(density_at_zero(Chi2Combo{{{1.0, 4, 0.0}}}) == 0.0);
  CHECK_THROWS_AS(density_at_zero(Chi2Combo{{{1.0, 1, 0.0}, {-1.0, 1, 0.0}}}), InvalidInput);
}

TEST_CASE("density at zero of a Laplace mixture with noncentrality") {
  // 2 e1 - 2 e2 with e_i unit exponentials convolved with nothing else is
  // Laplace with scale 2; scaling gives density 1/4 at zero.
  const Chi2Combo scaled{{{1.0, 2, 0.0}, {-1.0, 2, 0.0}}};
  CHECK(std::abs(density_at_zero(scaled) - 0.25) <= 1e-8);
}

TEST_CASE("density at zero scales inversely with the weights") {
  std::mt19937_64 rng(311);
  for (int trial = 0; trial < 5; ++trial) {
    auto c = random_mixed_combo(rng, 4);
    const double base = density_at_zero(c);
    for (auto& t : c.terms) t.weight *= 3.0;
    CHECK(density_at_zero(c) == doctest::Approx(base / 3.0).epsilon(1e-8));
  }
}

TEST_CASE("density at zero against Monte Carlo") {
  std::mt19937_64 rng(321);
  for (int trial = 0; trial < 3; ++trial) {
    const auto c = random_mixed_combo(rng, 4);
    const double d = density_at_zero(c);
    const auto mc = mc_density_at_zero(c, 0.05, 2000000, 100 + trial);
    CHECK(std::abs(mc.value - d) <= 4 * mc.std_error);
  }
}

TEST_CASE("density at zero against Imhof differences") {
  std::mt19937_64 rng(331);
  for (int trial = 0; trial < 5; ++trial) {
    const auto c = random_mixed_combo(rng, 5);
    const double h = 1e-4;
    const double diff = (imhof_cdf(c, h, 1e-13) - imhof_cdf(c, -h, 1e-13)) / (2 * h);
    CHECK(density_at_zero(c) == doctest::Approx(diff).epsilon(1e-5));
  }
}

TEST_CASE("Imhof examples") {
  const Chi2Combo sym{{{1.0, 1, 0.0}, {-1.0, 1, 0.0}}};
  CHECK(imhof_cdf(sym, 0.0) == doctest::Approx(0.5).epsilon(1e-10));
  boost::math::chi_squared_distribution<> chi1(1.0);
  for (double q : {0.5, 1.0, 4.0}) {
    CHECK(std::abs(imhof_cdf(Chi2Combo{{{1.0, 1, 0.0}}}, q) - boost::math::cdf(chi1, q)) <= 1e-9);
  }
  boost::math::non_central_chi_squared nc(3.0, 2.0);
  for (double q : {0.5, 3.0, 9.0}) {
    CHECK(std::abs(imhof_cdf(Chi2Combo{{{1.0, 3, 2.0}}}, q) - boost::math::cdf(nc, q)) <= 1e-9);
  }
}

TEST_CASE("Imhof tails are complementary and monotone") {
  std::mt19937_64 rng(341);
  const auto c = random_mixed_combo(rng, 5);
  double prev = 0.0;
  for (double x = -30.0; x <= 30.0; x += 1.5) {
    const auto t = imhof_tails(c, x);
    CHECK(t.lower + t.upper == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(t.lower >= prev - 1e-10);
    prev = t.lower;
  }
  CHECK(imhof_cdf(c, -500.0) <= 1e-9);
  CHECK(imhof_cdf(c, 500.0) >= 1 - 1e-9);
}

TEST_CASE("Imhof against Monte Carlo") {
  std::mt19937_64 rng(351);
  for (int trial = 0; trial < 3; ++trial) {
    const auto c = random_mixed_combo(rng, 5);
    for (double x : {-2.0, 0.0, 1.5}) {
      const auto mc = mc_cdf_combo(c, x, 1000000, 200 + trial);
      CHECK(std::abs(imhof_cdf(c, x) - mc.value) <= 4 * mc.std_error);
    }
  }
}
