#include "qfratio/support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qfratio/errors.hpp"

namespace qfratio {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct EdgeValue {
  double value;
  SupportCase tag;
};

double max_abs_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("eigensolver failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Largest eigenvalue of diag(lambda_B)^{-1} S via the symmetric form
/// diag(lambda_B)^{-1/2} S diag(lambda_B)^{-1/2}.
double largest_scaled_eigenvalue(const Matrix& s, const Vector& lambda_b) {
  const Vector w = lambda_b.cwiseSqrt().cwiseInverse();
  const Matrix scaled = w.asDiagonal() * s * w.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (scaled + scaled.transpose()),
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("eigensolver failed on Schur complement");
  }
  return solver.eigenvalues().maxCoeff();
}

EdgeValue right_edge(const QuadFormRatio& ratio) {
  const double tol = ratio.tolerances().tol_zero_eig;
  const BlockDecomp d = decompose_B(ratio);

  if (d.p == 0) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(ratio.A(), ratio.B(),
                                                            Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw NumericalFailure("generalized eigensolver failed on (A, B)");
    }
    return {solver.eigenvalues().maxCoeff(), SupportCase::Case1};
  }

  const double zero = tol * max_abs_eigenvalue(ratio.A());
  const SymmetricEigen c22 = symmetric_eigen(d.C22, tol);
  const double c22_max = c22.values.maxCoeff();

  if (c22_max > zero) return {kInf, SupportCase::Case2a};

  if (c22_max < -zero) {
    Eigen::LLT<Matrix> llt(-d.C22);
    if (llt.info() == Eigen::Success) {
      const Matrix s = d.C11 + d.C12 * llt.solve(d.C21);
      return {largest_scaled_eigenvalue(s, d.lambda_B), SupportCase::Case2b};
    }
  }

  // Case 2(c): C22 <= 0 with a null space.
  std::vector<Eigen::Index> null_idx;
  std::vector<Eigen::Index> neg_idx;
  for (Eigen::Index i = 0; i < c22.values.size(); ++i) {
    (std::abs(c22.values(i)) <= zero ? null_idx : neg_idx).push_back(i);
  }
  for (Eigen::Index i : null_idx) {
    if ((d.C12 * c22.vectors.col(i)).norm() > zero) {
      return {kInf, SupportCase::Case2cInfinite};
    }
  }
  Matrix s = d.C11;
  for (Eigen::Index i : neg_idx) {
    const Vector v = d.C12 * c22.vectors.col(i);
    s -= v * v.transpose() / c22.values(i);
  }
  return {largest_scaled_eigenvalue(s, d.lambda_B), SupportCase::Case2cFinite};
}

// Rates within `tol` of zero are set to exactly zero; the last is exactly 1.
Vector snap_rates(Vector omega, double tol) {
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    if (omega(i) <= tol) omega(i) = 0.0;
  }
  omega(omega.size() - 1) = 1.0;
  return omega;
}

bool tail_in_class(SupportCase c) {
  return c == SupportCase::Case1 || c == SupportCase::Case2b ||
         c == SupportCase::Case2cFinite || c == SupportCase::Case2cInfinite;
}

EdgeStructure finite_right_edge(const QuadFormRatio& ratio, double r_bar) {
  const double tol = ratio.tolerances().tol_zero_eig;
  const Eigen::Index n = ratio.dim();
  const SymmetricEigen pencil = symmetric_eigen(ratio.A() - r_bar * ratio.B(), tol);
  const double zero = tol * pencil.values.cwiseAbs().maxCoeff();

  Eigen::Index m = 0;
  while (m < n && std::abs(pencil.values(n - 1 - m)) <= zero) ++m;
  if (m == 0) {
    throw NumericalFailure("largest pencil eigenvalue does not vanish at the right edge");
  }
  if (m == n) {
    throw UnsupportedInstance("pencil vanishes identically at the edge (m = n)");
  }

  const Matrix u0 = pencil.vectors.rightCols(m);
  const Matrix t = u0.transpose() * ratio.B() * u0;
  const SymmetricEigen tau = symmetric_eigen(0.5 * (t + t.transpose()), tol);
  const double tau_max = tau.values(m - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> b_eig(ratio.B(), Eigen::EigenvaluesOnly);
  if (!(tau_max > tol * b_eig.eigenvalues().maxCoeff())) {
    throw UnsupportedInstance("B vanishes on the limiting null space (tau_n = 0)");
  }

  EdgeStructure e;
  e.side = Side::right;
  e.edge = r_bar;
  e.m = m;
  e.omega = snap_rates(tau.values / tau_max, tol);
  Matrix p2 = u0 * tau.vectors;
  canonical_signs(p2);
  e.nu0 = p2.transpose() * ratio.mu();
  e.H_edge = p2.transpose() * ratio.B() * p2;
  return e;
}

// r_bar = infinity (case 2c). Second-order perturbation of D(eps) = eps*A - B
// about eps = 0: on the null space of C22 the vanishing eigenvalues behave as
// eps^2 * eig(E) with E = O_C2' C21 diag(lambda_B)^{-1} C12 O_C2.
EdgeStructure infinite_right_edge(const QuadFormRatio& ratio) {
  const double tol = ratio.tolerances().tol_zero_eig;
  const BlockDecomp d = decompose_B(ratio);
  const double a_scale = max_abs_eigenvalue(ratio.A());
  const double zero = tol * a_scale;

  const SymmetricEigen c22 = symmetric_eigen(d.C22, tol);
  std::vector<Eigen::Index> null_idx;
  for (Eigen::Index i = 0; i < c22.values.size(); ++i) {
    if (std::abs(c22.values(i)) <= zero) null_idx.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(null_idx.size());
  if (m == 0) {
    throw NumericalFailure("C22 has no null space at an infinite 2(c) edge");
  }
  Matrix oc2(d.p, m);
  for (Eigen::Index k = 0; k < m; ++k) oc2.col(k) = c22.vectors.col(null_idx[k]);

  const Matrix coupling = d.C12 * oc2;  // (n-p) x m
  const Matrix e_mat =
      coupling.transpose() * d.lambda_B.cwiseInverse().asDiagonal() * coupling;
  const SymmetricEigen rates = symmetric_eigen(0.5 * (e_mat + e_mat.transpose()), tol);
  const double rate_max = rates.values(m - 1);
  if (!(rate_max > tol * a_scale * a_scale / d.lambda_B.maxCoeff())) {
    throw UnsupportedInstance("largest eigenvalue has zero derivative at r = infinity");
  }

  EdgeStructure e;
  e.side = Side::right;
  e.edge = kInf;
  e.m = m;
  e.omega = snap_rates(rates.values / rate_max, tol);
  Matrix p20 = d.null_basis() * oc2 * rates.vectors;
  // Sign flips of the limiting vectors carry over to the first-order terms.
  Matrix w = rates.vectors;
  const Matrix unsigned_p20 = p20;
  canonical_signs(p20);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (p20.col(k).dot(unsigned_p20.col(k)) < 0.0) w.col(k) *= -1.0;
  }
  e.nu0 = p20.transpose() * ratio.mu();
  e.H_edge = w.transpose() * e_mat * w;
  return e;
}

}  // namespace

std::string_view to_string(SupportCase c) {
  switch (c) {
    case SupportCase::Case1:
      return "1";
    case SupportCase::Case2a:
      return "2a";
    case SupportCase::Case2b:
      return "2b";
    case SupportCase::Case2cFinite:
      return "2c-finite";
    case SupportCase::Case2cInfinite:
      return "2c-infinite";
    case SupportCase::Degenerate:
      return "degenerate";
  }
  return "unknown";
}

std::string_view to_string(Side s) { return s == Side::right ? "right" : "left"; }

Matrix BlockDecomp::range_basis() const {
  return O_B.topRows(O_B.rows() - p).transpose();
}

Matrix BlockDecomp::null_basis() const { return O_B.bottomRows(p).transpose(); }

BlockDecomp decompose_B(const QuadFormRatio& ratio) {
  const double tol = ratio.tolerances().tol_zero_eig;
  const SymmetricEigen eig = symmetric_eigen(ratio.B(), tol);
  const Eigen::Index n = ratio.dim();
  const double zero = tol * eig.values.maxCoeff();

  BlockDecomp d;
  while (d.p < n && eig.values(d.p) <= zero) ++d.p;
  const Eigen::Index q = n - d.p;

  d.O_B.resize(n, n);
  d.O_B.topRows(q) = eig.vectors.rightCols(q).transpose();
  d.O_B.bottomRows(d.p) = eig.vectors.leftCols(d.p).transpose();
  d.lambda_B = eig.values.tail(q);

  const Matrix c = d.O_B * ratio.A() * d.O_B.transpose();
  d.C11 = c.topLeftCorner(q, q);
  d.C12 = c.topRightCorner(q, d.p);
  d.C21 = c.bottomLeftCorner(d.p, q);
  d.C22 = c.bottomRightCorner(d.p, d.p);
  return d;
}

SupportInfo support(const QuadFormRatio& ratio) {
  if (const auto c = is_degenerate(ratio)) {
    throw UnsupportedInstance("degenerate ratio: R is the point mass at " + std::to_string(*c));
  }
  const EdgeValue right = right_edge(ratio);
  const EdgeValue left = right_edge(negate(ratio));

  SupportInfo info;
  info.r_bar = right.value;
  info.l = -left.value;
  info.case_tag = right.tag;
  info.left_case = left.tag;
  std::tie(info.in_CR, info.in_CL) = classify_tails(ratio, info);
  return info;
}

std::pair<bool, bool> classify_tails(const QuadFormRatio& /*ratio*/, const SupportInfo& info) {
  return {tail_in_class(info.case_tag), tail_in_class(info.left_case)};
}

EdgeStructure edge_structure(const QuadFormRatio& ratio, const SupportInfo& info, Side side) {
  if (side == Side::left) {
    SupportInfo mirrored;
    mirrored.l = -info.r_bar;
    mirrored.r_bar = -info.l;
    mirrored.case_tag = info.left_case;
    mirrored.left_case = info.case_tag;
    mirrored.in_CR = info.in_CL;
    mirrored.in_CL = info.in_CR;
    EdgeStructure e = edge_structure(negate(ratio), mirrored, Side::right);
    e.side = Side::left;
    e.edge = info.l;
    return e;
  }
  if (!info.in_CR) {
    throw UnsupportedInstance("edge is not in the tail class (case " +
                              std::string(to_string(info.case_tag)) + ")");
  }
  return std::isfinite(info.r_bar) ? finite_right_edge(ratio, info.r_bar)
                                   : infinite_right_edge(ratio);
}

InfiniteEdgeSample sample_infinite_edge(const QuadFormRatio& ratio, Eigen::Index m, double eps) {
  if (m < 1 || m >= ratio.dim() || !(eps > 0.0)) {
    throw InvalidInput("sample_infinite_edge: need 1 <= m < n and eps > 0");
  }
  // The wanted eigenvalues are O(eps^2), far below any relative tie threshold.
  const SymmetricEigen eig = symmetric_eigen(eps * ratio.A() - ratio.B(), 0.0);
  InfiniteEdgeSample out;
  out.eps = eps;
  out.psi = eig.values.tail(m);
  Matrix p = eig.vectors.rightCols(m);
  canonical_signs(p);
  out.nu0 = p.transpose() * ratio.mu();
  out.H_scaled = p.transpose() * ratio.B() * p / (eps * eps);
  return out;
}

}  // namespace qfratio
