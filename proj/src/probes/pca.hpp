#pragma once

#include <string>
#include <vector>

#include "probes/activation_set.hpp"

namespace memaudit {

struct PcaProjection {
  Matrix components;  // n_components x dim, orthonormal rows (zero rows past the rank)
  Matrix projected;   // n x n_components, centered data times components^T
  std::vector<double> explained_variance_ratio;
  Vector mean;
  std::vector<std::string> warnings;
};

// Eigendecomposition of the sample covariance of the centered points. Needs
// n >= 2 and dim >= n_components >= 1 (Error(InvalidArgument) otherwise).
// Components beyond the numerical rank are zero-filled with a warning.
PcaProjection pca_project(const Matrix& points, int n_components = 2);

// Sum of squared residuals after projecting centered points on the rows of
// basis (assumed orthonormal).
double reconstruction_error(const Matrix& points, const Vector& mean, const Matrix& basis);

// "pc1,pc2,label,field_kind" rows; labels may be empty (written as blank).
std::string pca_csv(const PcaProjection& projection, const std::vector<std::string>& labels,
                    const std::string& field_kind);

}  // namespace memaudit
