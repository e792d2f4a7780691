#pragma once

#include <string_view>

namespace qfratio {

/// Numerical tolerances shared by every module. All must be strictly positive.
///
/// `tol_zero_eig` and `tol_psd` are relative: an eigenvalue is judged zero when
/// its magnitude is at most `tol * max|eigenvalue|` of the matrix in question.
struct Tolerances {
  double tol_psd = 1e-9;
  double tol_orth = 1e-9;
  double tol_zero_eig = 1e-9;
  double tol_root = 1e-14;
  double tol_quad = 1e-10;
  /// |ŵ| below which the CDF switches to the mean-point expansion.
  double mean_branch_threshold = 1e-5;

  /// Throws InvalidInput if any tolerance is not strictly positive and finite.
  void validate() const;

  /// Override one tolerance by its field name (e.g. "tol_quad").
  /// Throws InvalidInput for unknown names or invalid values.
  void set(std::string_view name, double value);
};

}  // namespace qfratio
