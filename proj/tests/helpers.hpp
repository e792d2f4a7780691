#pragma once

#include <cmath>
#include <random>

#include "qfratio/quadform.hpp"

namespace qfratio::testing {

inline Matrix random_symmetric(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> z;
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = z(rng);
  }
  return 0.5 * (m + m.transpose());
}

/// Well-conditioned symmetric positive definite matrix.
inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> z;
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = z(rng);
  }
  return g * g.transpose() / static_cast<double>(n) + 0.5 * Matrix::Identity(n, n);
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> z;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * z(rng);
  return v;
}

/// Random instance with B positive definite (support case 1).
inline QuadFormRatio random_case1(std::mt19937_64& rng, Eigen::Index n, double mu_scale = 1.0) {
  return make_ratio(random_symmetric(rng, n), random_spd(rng, n),
                    random_vector(rng, n, mu_scale));
}

/// Random instance with B = diag(Lambda, 0) and C22 negative definite
/// (support case 2b); `p` zero eigenvalues of B.
inline QuadFormRatio random_case2b(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p) {
  Matrix b = Matrix::Zero(n, n);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (Eigen::Index i = 0; i < n - p; ++i) b(i, i) = u(rng);
  Matrix a = random_symmetric(rng, n);
  a.bottomRightCorner(p, p) = -random_spd(rng, p);
  // Rotate so that no structure is visible in the coordinates.
  Eigen::HouseholderQR<Matrix> qr(random_symmetric(rng, n) + 3.0 * Matrix::Identity(n, n));
  const Matrix q = qr.householderQ();
  return make_ratio(q * a * q.transpose(), q * b * q.transpose(), random_vector(rng, n));
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace qfratio::testing
