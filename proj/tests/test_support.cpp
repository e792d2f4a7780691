#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "qfratio/builders.hpp"
#include "qfratio/errors.hpp"
#include "qfratio/support.hpp"

using namespace qfratio;
using qfratio::testing::random_case1;
using qfratio::testing::random_case2b;
using qfratio::testing::random_spd;
using qfratio::testing::random_symmetric;
using qfratio::testing::random_vector;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix diag(std::initializer_list<double> v) {
  Vector d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

/// B = diag(lambda, 0_p), C22 = 0 and a random C12 of full column rank,
/// rotated by a random orthogonal matrix.
QuadFormRatio random_case2c_infinite(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  Matrix b = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n - p; ++i) b(i, i) = u(rng);
  Matrix a = random_symmetric(rng, n);
  a.bottomRightCorner(p, p).setZero();
  Eigen::HouseholderQR<Matrix> qr(random_symmetric(rng, n) + 3.0 * Matrix::Identity(n, n));
  const Matrix q = qr.householderQ();
  return make_ratio(q * a * q.transpose(), q * b * q.transpose(), random_vector(rng, n));
}

Matrix permutation(Eigen::Index n, std::mt19937_64& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  Matrix perm = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) perm(i, idx[static_cast<std::size_t>(i)]) = 1.0;
  return perm;
}

}  // namespace

TEST_CASE("decompose_B on the Cauchy pencil") {
  const auto d = decompose_B(ratio_n2(0.0, 0.0));
  CHECK(d.p == 1);
  CHECK(d.C22(0, 0) == doctest::Approx(0.0));
  CHECK(std::abs(d.C12(0, 0)) == doctest::Approx(0.5));
}

TEST_CASE("decompose_B on the lag-2 serial correlation") {
  const auto d = decompose_B(ls_serial_corr(3, 2));
  CHECK(d.p == 2);
  CHECK(d.C22.norm() <= 1e-15);
}

TEST_CASE("decompose_B with full-rank B") {
  const auto d = decompose_B(make_ratio(diag({1, 2, 3}), Matrix::Identity(3, 3), Vector::Zero(3)));
  CHECK(d.p == 0);
  CHECK(d.C22.size() == 0);
}

TEST_CASE("block decomposition invariants") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = random_case2b(rng, 6, 1 + trial % 3);
    const auto d = decompose_B(q);
    const Eigen::Index n = q.dim();
    CHECK(d.p == 1 + trial % 3);
    CHECK((d.C12 - d.C21.transpose()).norm() <= 1e-12 * q.A().norm());
    Matrix expected = Matrix::Zero(n, n);
    expected.topLeftCorner(n - d.p, n - d.p) = d.lambda_B.asDiagonal();
    CHECK((d.O_B * q.B() * d.O_B.transpose() - expected).norm() <= 1e-12 * q.B().norm());
    CHECK((d.O_B * d.O_B.transpose() - Matrix::Identity(n, n)).norm() <= 1e-12);
    CHECK(d.lambda_B.minCoeff() > 0.0);
  }
}

TEST_CASE("support cases") {
  SUBCASE("F(1,1) is case 2a on the right") {
    const auto q = make_ratio(diag({1, 0}), diag({0, 1}), Vector::Zero(2));
    const auto s = support(q);
    CHECK(s.case_tag == SupportCase::Case2a);
    CHECK(s.r_bar == kInf);
    CHECK(s.l == 0.0);
    CHECK_FALSE(s.in_CR);
    // -A - rB = diag(-1, -r): the largest eigenvalue of the reflected
    // pencil vanishes at the left edge, so the left tail is in C_L.
    CHECK(s.left_case == SupportCase::Case2b);
    CHECK(s.in_CL);
    CHECK(spectrum_at(negate(q), -1e-9).lambdas(1) == doctest::Approx(1e-9));
  }
  SUBCASE("Cauchy pencil has the whole line") {
    const auto s = support(ratio_n2(0.0, 0.0));
    CHECK(s.case_tag == SupportCase::Case2cInfinite);
    CHECK(s.left_case == SupportCase::Case2cInfinite);
    CHECK(s.l == -kInf);
    CHECK(s.r_bar == kInf);
    CHECK(s.in_CR);
    CHECK(s.in_CL);
  }
  SUBCASE("diagonal definite pencil") {
    const auto s = support(make_ratio(diag({1, 0}), Matrix::Identity(2, 2), Vector::Zero(2)));
    CHECK(s.case_tag == SupportCase::Case1);
    CHECK(s.l == doctest::Approx(0.0));
    CHECK(s.r_bar == doctest::Approx(1.0));
    CHECK(s.in_CR);
    CHECK(s.in_CL);
  }
  SUBCASE("negative definite C22") {
    // R = 2x - x^2 with x = e2/e1: bounded above by 1, unbounded below.
    Matrix a(2, 2);
    a << 0, 1, 1, -1;
    const auto s = support(make_ratio(a, diag({1, 0}), Vector::Zero(2)));
    CHECK(s.case_tag == SupportCase::Case2b);
    CHECK(s.r_bar == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.left_case == SupportCase::Case2a);
    CHECK(s.l == -kInf);
    CHECK(s.in_CR);
    CHECK_FALSE(s.in_CL);
  }
  SUBCASE("common null space gives a finite 2c edge") {
    const auto s = support(make_ratio(diag({1, 2, 0}), diag({1, 1, 0}), Vector::Ones(3)));
    CHECK(s.case_tag == SupportCase::Case2cFinite);
    CHECK(s.left_case == SupportCase::Case2cFinite);
    CHECK(s.l == doctest::Approx(1.0));
    CHECK(s.r_bar == doctest::Approx(2.0));
  }
  SUBCASE("degenerate ratio is rejected") {
    CHECK_THROWS_AS(support(make_ratio(2.0 * Matrix::Identity(3, 3), Matrix::Identity(3, 3),
                                       Vector::Zero(3))),
                    UnsupportedInstance);
  }
}

TEST_CASE("classify_tails agrees with the support record") {
  const auto q = ratio_n2(0.2, 2.0);
  const auto s = support(q);
  const auto [cr, cl] = classify_tails(q, s);
  CHECK(cr);
  CHECK(cl);
  std::mt19937_64 rng(41);
  const auto definite = random_case1(rng, 5);
  const auto [dr, dl] = classify_tails(definite, support(definite));
  CHECK(dr);
  CHECK(dl);
}

TEST_CASE("Durbin-Watson support is bounded") {
  for (Design d : {Design::intercept, Design::trend}) {
    const auto q = durbin_watson(8, *design_matrix(d, 8));
    const auto s = support(q);
    CHECK(std::isfinite(s.l));
    CHECK(std::isfinite(s.r_bar));
    CHECK(s.in_CR);
    CHECK(s.in_CL);
    CHECK(s.l >= 0.0);
    CHECK(s.r_bar <= 4.0);
  }
}

TEST_CASE("edge of the Cauchy pencil") {
  const auto q = ratio_n2(0.2, 2.0);
  const auto s = support(q);
  const auto right = edge_structure(q, s, Side::right);
  CHECK(right.m == 1);
  CHECK(right.omega(0) == 1.0);
  CHECK(std::abs(right.nu0(0)) == doctest::Approx(2.0).epsilon(1e-12));
  const auto left = edge_structure(q, s, Side::left);
  CHECK(left.m == 1);
  CHECK(std::abs(left.nu0(0)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(left.H_edge(0, 0) == doctest::Approx(right.H_edge(0, 0)));
}

TEST_CASE("edge of the lag-2 serial correlation") {
  Vector mu(3);
  mu << 0.3, -1.2, 0.7;
  const auto q = ls_serial_corr(3, 2, std::nullopt, mu);
  const auto e = edge_structure(q, support(q), Side::right);
  REQUIRE(e.m == 2);
  CHECK(std::abs(e.omega(0)) <= 1e-6);
  CHECK(e.omega(1) == 1.0);
  CHECK(std::abs(std::abs(e.nu0(0)) - std::abs(mu(1))) <= 1e-6);
  CHECK(std::abs(std::abs(e.nu0(1)) - std::abs(mu(2))) <= 1e-6);
}

TEST_CASE("edge of the beta ratio") {
  Vector mu(3);
  mu << 0.5, -1.0, 2.0;
  const auto q = beta_matrices(6, 3, mu);
  const auto s = support(q);
  CHECK(s.r_bar == doctest::Approx(1.0));
  const auto e = edge_structure(q, s, Side::right);
  REQUIRE(e.m == 3);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(e.omega(i) == doctest::Approx(1.0));
  CHECK(e.nu0.squaredNorm() == doctest::Approx(mu.squaredNorm()).epsilon(1e-12));
  CHECK((e.H_edge - Matrix::Identity(3, 3)).norm() <= 1e-10);
  const auto left = edge_structure(q, s, Side::left);
  CHECK(left.m == 3);
  CHECK(left.nu0.norm() <= 1e-12);
}

TEST_CASE("edge structure invariants") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const auto q = trial % 2 == 0 ? random_case1(rng, 5) : random_case2b(rng, 5, 2);
    const auto s = support(q);
    for (Side side : {Side::right, Side::left}) {
      if (side == Side::left && !s.in_CL) continue;
      const auto e = edge_structure(q, s, side);
      CHECK(e.m >= 1);
      CHECK(e.omega(e.m - 1) == 1.0);
      for (Eigen::Index i = 1; i < e.m; ++i) CHECK(e.omega(i) >= e.omega(i - 1));
      CHECK((e.H_edge - e.H_edge.transpose()).norm() <= 1e-12 * (1 + e.H_edge.norm()));
      Eigen::SelfAdjointEigenSolver<Matrix> h(e.H_edge);
      CHECK(h.eigenvalues().minCoeff() >= -1e-10 * h.eigenvalues().cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("largest eigenvalue vanishes at a finite right edge") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = trial % 2 == 0 ? random_case1(rng, 2 + trial % 7)
                                  : random_case2b(rng, 4 + trial % 4, 1 + trial % 3);
    const auto s = support(q);
    REQUIRE(std::isfinite(s.r_bar));
    const auto at_edge = spectrum_at(q, s.r_bar);
    const double scale = at_edge.lambdas.cwiseAbs().maxCoeff();
    CHECK(std::abs(at_edge.lambdas(q.dim() - 1)) <= 1e-8 * scale);
    const double below = s.r_bar - 1e-3 * (1 + std::abs(s.r_bar));
    CHECK(spectrum_at(q, below).lambdas(q.dim() - 1) > 0.0);
  }
}

TEST_CASE("analytic infinite edge matches the small-eps eigenvectors") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 6;
    const Eigen::Index p = 1 + trial % 3;
    const auto q = random_case2c_infinite(rng, n, p);
    const auto s = support(q);
    REQUIRE(s.case_tag == SupportCase::Case2cInfinite);
    const auto e = edge_structure(q, s, Side::right);
    REQUIRE(e.m == p);

    // psi_k(eps) ~ eps^2 e_k, so the sample shares the ascending omega order.
    // Smaller eps loses digits to cancellation in P'BP / eps^2, which caps
    // the agreement at about 1e-5.
    const auto s1 = sample_infinite_edge(q, p, 1e-4);
    const auto s2 = sample_infinite_edge(q, p, 1e-5);
    const auto extrapolate = [](double coarse, double fine) { return (10 * fine - coarse) / 9; };
    for (Eigen::Index k = 0; k < p; ++k) {
      const Eigen::Index j = k;
      const double omega =
          extrapolate(s1.psi(j) / s1.psi(p - 1), s2.psi(j) / s2.psi(p - 1));
      CHECK(omega == doctest::Approx(e.omega(k)).epsilon(1e-6));
      const double nu = extrapolate(std::abs(s1.nu0(j)), std::abs(s2.nu0(j)));
      CHECK(nu == doctest::Approx(std::abs(e.nu0(k))).epsilon(1e-4));
      const double h = extrapolate(s1.H_scaled(j, j), s2.H_scaled(j, j));
      CHECK(h == doctest::Approx(e.H_edge(k, k)).epsilon(1e-4));
    }
  }
}

TEST_CASE("edge noncentralities do not depend on the coordinate order") {
  std::mt19937_64 rng(81);
  for (int trial = 0; trial < 10; ++trial) {
    Vector mu = random_vector(rng, 6);
    const auto q = beta_matrices(6, 3, mu.head(3));
    const Matrix perm = permutation(6, rng);
    const auto pq = make_ratio(perm * q.A() * perm.transpose(), perm * q.B() * perm.transpose(),
                               perm * q.mu());
    const auto e = edge_structure(q, support(q), Side::right);
    const auto pe = edge_structure(pq, support(pq), Side::right);
    CHECK(e.nu0.squaredNorm() == doctest::Approx(pe.nu0.squaredNorm()).epsilon(1e-12));
    CHECK(e.H_edge.trace() == doctest::Approx(pe.H_edge.trace()).epsilon(1e-12));
  }
  for (int trial = 0; trial < 10; ++trial) {
    const auto q = random_case1(rng, 5);
    const Matrix perm = permutation(5, rng);
    const auto pq = make_ratio(perm * q.A() * perm.transpose(), perm * q.B() * perm.transpose(),
                               perm * q.mu());
    const auto e = edge_structure(q, support(q), Side::right);
    const auto pe = edge_structure(pq, support(pq), Side::right);
    CHECK(std::abs(e.nu0(0)) == doctest::Approx(std::abs(pe.nu0(0))).epsilon(1e-9));
    CHECK(e.H_edge(0, 0) == doctest::Approx(pe.H_edge(0, 0)).epsilon(1e-9));
  }
}

TEST_CASE("edge_structure refuses sides outside the tail classes") {
  Matrix a(2, 2);
  a << 0, 1, 1, -1;
  const auto q = make_ratio(a, diag({1, 0}), Vector::Zero(2));
  CHECK_THROWS_AS(edge_structure(q, support(q), Side::left), UnsupportedInstance);
  const auto f11 = make_ratio(diag({1, 0}), diag({0, 1}), Vector::Zero(2));
  CHECK_THROWS_AS(edge_structure(f11, support(f11), Side::right), UnsupportedInstance);
}
