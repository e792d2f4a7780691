#include "qfratio/quadform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "qfratio/errors.hpp"

namespace qfratio {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void require_square(const Matrix& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw InvalidInput(std::string(name) + " must be square, got " + std::to_string(m.rows()) +
                       "x" + std::to_string(m.cols()));
  }
}

}  // namespace

void canonical_signs(Matrix& columns) {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    auto col = columns.col(j);
    const double cutoff = 1e-10 * col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > cutoff) {
        if (col(i) < 0.0) col *= -1.0;
        break;
      }
    }
  }
}

SymmetricEigen symmetric_eigen(const Matrix& m, double tie_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("symmetric eigensolver did not converge");
  }
  SymmetricEigen out{solver.eigenvalues(), solver.eigenvectors()};
  canonical_signs(out.vectors);

  const Eigen::Index n = out.values.size();
  const double scale = out.values.cwiseAbs().maxCoeff();
  const double gap = tie_tol * scale;
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && out.values(stop) - out.values(stop - 1) <= gap) ++stop;
    if (stop - start > 1) {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(stop - start));
      std::iota(order.begin(), order.end(), start);
      std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        const auto cx = out.vectors.col(x);
        const auto cy = out.vectors.col(y);
        for (Eigen::Index k = 0; k < cx.size(); ++k) {
          if (cx(k) != cy(k)) return cx(k) > cy(k);
        }
        return false;
      });
      Matrix block(out.vectors.rows(), stop - start);
      for (std::size_t k = 0; k < order.size(); ++k) {
        block.col(static_cast<Eigen::Index>(k)) = out.vectors.col(order[k]);
      }
      out.vectors.middleCols(start, stop - start) = block;
    }
    start = stop;
  }
  return out;
}

QuadFormRatio QuadFormRatio::with_tolerances(const Tolerances& tol) const {
  tol.validate();
  return QuadFormRatio(a_, b_, mu_, tol);
}

QuadFormRatio make_ratio(const Matrix& A, const Matrix& B, const Vector& mu,
                         const Tolerances& tol) {
  tol.validate();
  require_square(A, "A");
  require_square(B, "B");
  if (A.rows() != B.rows()) {
    throw InvalidInput("A and B must have the same size");
  }
  if (A.rows() < 2) {
    throw InvalidInput("dimension n must be at least 2");
  }
  if (mu.size() != A.rows()) {
    throw InvalidInput("mu must have length n = " + std::to_string(A.rows()));
  }
  if (!all_finite(A) || !all_finite(B) || !mu.allFinite()) {
    throw InvalidInput("A, B and mu must be finite");
  }

  Matrix a = symmetrized(A);
  Matrix b = symmetrized(B);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(b, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("eigensolver failed on B");
  }
  const Vector& eig = solver.eigenvalues();
  const double scale = eig.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    throw InvalidInput("B is identically zero");
  }
  if (eig.minCoeff() < -tol.tol_psd * scale) {
    throw InvalidInput("B is not positive semidefinite (smallest eigenvalue " +
                       std::to_string(eig.minCoeff()) + ")");
  }
  return QuadFormRatio(std::move(a), std::move(b), mu, tol);
}

QuadFormRatio whiten(const Matrix& A, const Matrix& B, const Vector& mu, const Matrix& sigma,
                     const Tolerances& tol) {
  require_square(sigma, "Sigma");
  if (sigma.rows() != A.rows()) {
    throw InvalidInput("Sigma must match the size of A");
  }
  if (!all_finite(sigma)) {
    throw InvalidInput("Sigma must be finite");
  }
  if (mu.size() != sigma.rows()) {
    throw InvalidInput("mu must have length n = " + std::to_string(sigma.rows()));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(sigma));
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("eigensolver failed on Sigma");
  }
  const Vector& eig = solver.eigenvalues();
  if (eig.minCoeff() <= tol.tol_zero_eig * eig.cwiseAbs().maxCoeff()) {
    throw InvalidInput("Sigma is not positive definite");
  }
  const Matrix& v = solver.eigenvectors();
  const Matrix root = v * eig.cwiseSqrt().asDiagonal() * v.transpose();
  const Matrix inv_root = v * eig.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  return make_ratio(root * A * root, root * B * root, inv_root * mu, tol);
}

SpectrumAtR spectrum_at(const QuadFormRatio& ratio, double r) {
  if (!std::isfinite(r)) {
    throw InvalidInput("spectrum_at: r must be finite");
  }
  const Matrix pencil = ratio.A() - r * ratio.B();
  SymmetricEigen eig = symmetric_eigen(pencil, ratio.tolerances().tol_zero_eig);

  SpectrumAtR out;
  out.r = r;
  out.lambdas = std::move(eig.values);
  out.P = eig.vectors.transpose();
  out.nu = out.P * ratio.mu();
  out.H = out.P * ratio.B() * out.P.transpose();
  return out;
}

QuadFormRatio negate(const QuadFormRatio& ratio) {
  return QuadFormRatio(-ratio.A(), ratio.B(), ratio.mu(), ratio.tolerances());
}

std::optional<double> is_degenerate(const QuadFormRatio& ratio) {
  const Matrix& a = ratio.A();
  const Matrix& b = ratio.B();
  const double c = a.cwiseProduct(b).sum() / b.squaredNorm();
  const double residual = (a - c * b).norm();
  const double bound =
      ratio.tolerances().tol_zero_eig * std::max(a.norm(), std::abs(c) * b.norm());
  if (residual <= bound) return c;
  return std::nullopt;
}

}  // namespace qfratio
