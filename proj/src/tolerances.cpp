#include "qfratio/tolerances.hpp"

#include <cmath>
#include <string>

#include "qfratio/errors.hpp"

namespace qfratio {

namespace {

void require_positive(std::string_view name, double value) {
  if (!(std::isfinite(value) && value > 0.0)) {
    throw InvalidInput("tolerance " + std::string(name) + " must be finite and > 0");
  }
}

}  // namespace

void Tolerances::validate() const {
  require_positive("tol_psd", tol_psd);
  require_positive("tol_orth", tol_orth);
  require_positive("tol_zero_eig", tol_zero_eig);
  require_positive("tol_root", tol_root);
  require_positive("tol_quad", tol_quad);
  require_positive("mean_branch_threshold", mean_branch_threshold);
}

void Tolerances::set(std::string_view name, double value) {
  require_positive(name, value);
  if (name == "tol_psd") {
    tol_psd = value;
  } else if (name == "tol_orth") {
    tol_orth = value;
  } else if (name == "tol_zero_eig") {
    tol_zero_eig = value;
  } else if (name == "tol_root") {
    tol_root = value;
  } else if (name == "tol_quad") {
    tol_quad = value;
  } else if (name == "mean_branch_threshold") {
    mean_branch_threshold = value;
  } else {
    throw InvalidInput("unknown tolerance name: " + std::string(name));
  }
}

}  // namespace qfratio
