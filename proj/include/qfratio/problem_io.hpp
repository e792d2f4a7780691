#pragma once

#include <iosfwd>
#include <string>

#include "qfratio/quadform.hpp"

namespace qfratio {

/// Problem files are JSON objects {"A": [[...]], "B": [[...]], "mu": [...]}
/// with an optional "sigma": [[...]] covariance. Matrices are row-major.
/// A sigma entry is whitened away on load.
QuadFormRatio parse_problem(const std::string& text, const Tolerances& tol = {});
QuadFormRatio load_problem(const std::string& path, const Tolerances& tol = {});

/// Serializes A, B and mu (never sigma: stored ratios are already whitened).
std::string problem_to_json(const QuadFormRatio& ratio);
void save_problem(const std::string& path, const QuadFormRatio& ratio);

}  // namespace qfratio
