#include "qfratio/builders.hpp"

#include <string>

#include "qfratio/errors.hpp"

namespace qfratio {

namespace {

Vector mean_or_zero(const std::optional<Vector>& mu, int n) {
  if (!mu) return Vector::Zero(n);
  if (mu->size() != n) throw InvalidInput("mu must have length n = " + std::to_string(n));
  return *mu;
}

}  // namespace

Matrix residual_projector(const Matrix& X) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (k < 1 || k >= n) throw InvalidInput("design matrix needs 1 <= columns < n");
  if (!X.allFinite()) throw InvalidInput("design matrix must be finite");
  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) throw InvalidInput("design matrix is rank deficient");
  const Matrix q = qr.householderQ() * Matrix::Identity(n, k);
  Matrix m = Matrix::Identity(n, n) - q * q.transpose();
  return 0.5 * (m + m.transpose());
}

QuadFormRatio ls_serial_corr(int n, int lag, const std::optional<Matrix>& X,
                             const std::optional<Vector>& mu) {
  if (n < 2) throw InvalidInput("ls_serial_corr needs n >= 2");
  if (lag < 1 || lag > n - 1) throw InvalidInput("lag must satisfy 1 <= lag <= n-1");
  Matrix a = Matrix::Zero(n, n);
  Matrix b = Matrix::Zero(n, n);
  for (int t = 0; t + lag < n; ++t) {
    a(t, t + lag) = 0.5;
    a(t + lag, t) = 0.5;
    b(t, t) = 1.0;
  }
  if (X) {
    if (X->rows() != n) throw InvalidInput("design matrix must have n rows");
    const Matrix m = residual_projector(*X);
    a = m * a * m;
    b = m * b * m;
  }
  return make_ratio(a, b, mean_or_zero(mu, n));
}

QuadFormRatio durbin_watson(int n, const Matrix& X, const std::optional<Vector>& mu) {
  if (n < 3) throw InvalidInput("durbin_watson needs n >= 3");
  if (X.rows() != n) throw InvalidInput("design matrix must have n rows");
  Matrix d = Matrix::Zero(n - 1, n);
  for (int t = 0; t + 1 < n; ++t) {
    d(t, t) = -1.0;
    d(t, t + 1) = 1.0;
  }
  const Matrix m = residual_projector(X);
  return make_ratio(m * d.transpose() * d * m, m, mean_or_zero(mu, n));
}

QuadFormRatio beta_matrices(int n, int m, const Vector& mu) {
  if (m < 1 || m > n - 1) throw InvalidInput("beta_matrices needs 1 <= m <= n-1");
  if (mu.size() != m) throw InvalidInput("beta_matrices needs an m-vector of means");
  Matrix a = Matrix::Zero(n, n);
  a.topLeftCorner(m, m).setIdentity();
  Vector full = Vector::Zero(n);
  full.head(m) = mu;
  return make_ratio(a, Matrix::Identity(n, n), full);
}

QuadFormRatio ratio_n2(double mu1, double mu2) {
  Matrix a(2, 2);
  a << 0.0, 0.5, 0.5, 0.0;
  Matrix b(2, 2);
  b << 1.0, 0.0, 0.0, 0.0;
  Vector mu(2);
  mu << mu1, mu2;
  return make_ratio(a, b, mu);
}

Design parse_design(std::string_view name) {
  if (name == "none") return Design::none;
  if (name == "intercept") return Design::intercept;
  if (name == "trend") return Design::trend;
  throw InvalidInput("unknown design '" + std::string(name) + "' (none|intercept|trend)");
}

std::optional<Matrix> design_matrix(Design d, int n) {
  switch (d) {
    case Design::none:
      return std::nullopt;
    case Design::intercept:
      return Matrix::Ones(n, 1);
    case Design::trend: {
      Matrix x(n, 2);
      for (int t = 0; t < n; ++t) {
        x(t, 0) = 1.0;
        x(t, 1) = t + 1.0;
      }
      return x;
    }
  }
  return std::nullopt;
}

QuadFormRatio build(const BuilderSpec& spec) {
  if (spec.kind == "ls_serial") {
    return ls_serial_corr(spec.n, spec.lag, design_matrix(spec.design, spec.n), spec.mu);
  }
  if (spec.kind == "durbin_watson") {
    const auto x = design_matrix(spec.design == Design::none ? Design::intercept : spec.design,
                                 spec.n);
    return durbin_watson(spec.n, *x, spec.mu);
  }
  if (spec.kind == "beta") {
    return beta_matrices(spec.n, spec.m, spec.mu ? *spec.mu : Vector::Zero(spec.m));
  }
  if (spec.kind == "ratio_n2") {
    const Vector mu = spec.mu ? *spec.mu : Vector::Zero(2);
    if (mu.size() != 2) throw InvalidInput("ratio_n2 needs two means");
    return ratio_n2(mu(0), mu(1));
  }
  throw InvalidInput("unknown builder kind '" + spec.kind +
                     "' (ls_serial|durbin_watson|beta|ratio_n2)");
}

}  // namespace qfratio
