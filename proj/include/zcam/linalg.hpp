#pragma once

#include <optional>
#include <vector>

#include "zcam/matrix.hpp"

namespace zcam::linalg {

struct SymEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]
};

/// Cyclic Jacobi rotations on a symmetric matrix.
SymEigen jacobi_eigen(Matrix a, double tol = 1e-14, std::size_t max_sweeps = 100);

/// Lower-triangular L with a = L L^T, or nullopt if a is not positive definite.
std::optional<Matrix> cholesky(const Matrix& a);

/// Modified Gram-Schmidt on the columns of q, in place. Columns that vanish
/// are replaced by unit vectors orthogonal to the rest.
void orthonormalize_columns(Matrix& q);

Matrix transpose(const Matrix& a);

}  // namespace zcam::linalg
