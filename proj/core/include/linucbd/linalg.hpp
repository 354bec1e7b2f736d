#pragma once

#include "linucbd/model.hpp"

namespace linucbd {

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Iterates until the off-diagonal Frobenius norm drops below 1e-12.
/// Throws kAsymmetricMatrix if |m(i,j) - m(j,i)| > 1e-12 anywhere.
Vector symmetric_eigenvalues(const Matrix& m);

/// Smallest eigenvalue of a symmetric matrix (see symmetric_eigenvalues).
double lambda_min(const Matrix& m);

/// Solves a x = b by Gaussian elimination with partial pivoting.
/// Throws kSingularSystem when a pivot vanishes relative to the matrix scale.
Vector solve_dense(Matrix a, Vector b);

}  // namespace linucbd
