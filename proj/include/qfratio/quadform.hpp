#pragma once

#include <Eigen/Dense>
#include <optional>

#include "qfratio/tolerances.hpp"

namespace qfratio {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// The ratio R = e'Ae / e'Be with e ~ N(mu, I).
///
/// Instances are immutable and always hold symmetric A and B with B positive
/// semidefinite (within `tol_psd`). Construct through make_ratio() or whiten().
class QuadFormRatio {
 public:
  const Matrix& A() const noexcept { return a_; }
  const Matrix& B() const noexcept { return b_; }
  const Vector& mu() const noexcept { return mu_; }
  Eigen::Index dim() const noexcept { return a_.rows(); }
  const Tolerances& tolerances() const noexcept { return tol_; }

  /// Same matrices and mean with different tolerances.
  QuadFormRatio with_tolerances(const Tolerances& tol) const;

  friend bool operator==(const QuadFormRatio& x, const QuadFormRatio& y) {
    return x.a_ == y.a_ && x.b_ == y.b_ && x.mu_ == y.mu_;
  }

 private:
  QuadFormRatio(Matrix a, Matrix b, Vector mu, Tolerances tol)
      : a_(std::move(a)), b_(std::move(b)), mu_(std::move(mu)), tol_(tol) {}

  friend QuadFormRatio make_ratio(const Matrix&, const Matrix&, const Vector&,
                                  const Tolerances&);
  friend QuadFormRatio negate(const QuadFormRatio&);

  Matrix a_;
  Matrix b_;
  Vector mu_;
  Tolerances tol_;
};

/// Eigen-data of the pencil A - rB at a point r.
///
/// Rows of `P` are eigenvectors, so that A - rB = P' diag(lambdas) P,
/// `nu` = P mu and `H` = P B P'.
struct SpectrumAtR {
  double r = 0.0;
  Vector lambdas;
  Matrix P;
  Vector nu;
  Matrix H;
};

/// Symmetrizes A and B, validates shapes and that B is PSD and nonzero.
QuadFormRatio make_ratio(const Matrix& A, const Matrix& B, const Vector& mu,
                         const Tolerances& tol = {});

/// Reduces e ~ N(mu, Sigma) to unit covariance:
/// (S A S, S B S, S^{-1} mu) with S the symmetric square root of Sigma.
QuadFormRatio whiten(const Matrix& A, const Matrix& B, const Vector& mu,
                     const Matrix& sigma, const Tolerances& tol = {});

SpectrumAtR spectrum_at(const QuadFormRatio& ratio, double r);

/// (-A, B, mu). Left-tail questions about R are right-tail questions about -R.
QuadFormRatio negate(const QuadFormRatio& ratio);

/// Returns c when A = cB within `tol_zero_eig` (R is then the point mass at c).
std::optional<double> is_degenerate(const QuadFormRatio& ratio);

/// Ascending eigen-decomposition of a symmetric matrix with a deterministic
/// eigenvector basis: each vector has its first non-negligible component
/// positive, and vectors inside a cluster of tied eigenvalues are ordered
/// lexicographically (descending).
struct SymmetricEigen {
  Vector values;
  Matrix vectors;  // columns
};

SymmetricEigen symmetric_eigen(const Matrix& m, double tie_tol);

/// Flips each column so its first non-negligible entry is positive.
void canonical_signs(Matrix& columns);

}  // namespace qfratio
