#pragma once

#include <string_view>
#include <utility>

#include "qfratio/quadform.hpp"

namespace qfratio {

/// B and A expressed in the eigenbasis of B.
///
/// Rows of `O_B` are eigenvectors of B: first the n-p with positive
/// eigenvalues `lambda_B`, then the p spanning null(B). The C blocks partition
/// O_B A O_B' conformably (C11 is (n-p)x(n-p), C22 is pxp).
struct BlockDecomp {
  Eigen::Index p = 0;
  Matrix O_B;
  Vector lambda_B;
  Matrix C11, C12, C21, C22;

  /// n x (n-p) basis of range(B) (columns).
  Matrix range_basis() const;
  /// n x p basis of null(B) (columns).
  Matrix null_basis() const;
};

enum class SupportCase { Case1, Case2a, Case2b, Case2cFinite, Case2cInfinite, Degenerate };

std::string_view to_string(SupportCase c);

enum class Side { right, left };

std::string_view to_string(Side s);

/// Support (l, r_bar) of R and tail-class membership. Infinite endpoints are
/// stored as +-infinity. `case_tag` describes the right edge and `left_case`
/// the left edge (the right edge of -R).
struct SupportInfo {
  double l = 0.0;
  double r_bar = 0.0;
  SupportCase case_tag = SupportCase::Case1;
  SupportCase left_case = SupportCase::Case1;
  bool in_CR = false;
  bool in_CL = false;
};

/// Eigen-structure of the pencil at one edge of support.
///
/// Entries are paired: omega(i), nu0(i) and H_edge(i, i) belong to the same
/// limiting eigenvector. omega is ascending with omega(m-1) == 1 exactly.
/// For an infinite edge H_edge is the leading coefficient of P B P' (which
/// itself vanishes like 1/r^2); only ratios of its entries are meaningful.
struct EdgeStructure {
  Side side = Side::right;
  double edge = 0.0;
  Eigen::Index m = 0;
  Vector nu0;
  Vector omega;
  Matrix H_edge;
};

BlockDecomp decompose_B(const QuadFormRatio& ratio);

/// Throws UnsupportedInstance for a degenerate ratio.
SupportInfo support(const QuadFormRatio& ratio);

/// (in C_R, in C_L) from the edge cases recorded in `info`.
std::pair<bool, bool> classify_tails(const QuadFormRatio& ratio, const SupportInfo& info);

/// Throws UnsupportedInstance when the requested side is outside C_R / C_L,
/// when the limiting rates are all zero, or when every eigenvalue vanishes.
EdgeStructure edge_structure(const QuadFormRatio& ratio, const SupportInfo& info, Side side);

/// Top-m eigen-data of D(eps) = eps*A - B, the numerical route to an
/// infinite right edge. `nu0` and `H_scaled` = P B P' / eps^2 converge to the
/// EdgeStructure values as eps -> 0 (up to sign and rotation within tied
/// omega blocks); `psi` holds the m largest eigenvalues of D(eps).
struct InfiniteEdgeSample {
  double eps = 0.0;
  Vector psi;
  Vector nu0;
  Matrix H_scaled;
};

InfiniteEdgeSample sample_infinite_edge(const QuadFormRatio& ratio, Eigen::Index m, double eps);

}  // namespace qfratio
