#pragma once

#include <array>

namespace geoflow::linalg {

// Packed symmetric matrices, upper triangle row-major, dim <= 3:
//   n=1: [a00]   n=2: [a00,a01,a11]   n=3: [a00,a01,a02,a11,a12,a22]
// The layout matches SymTensorField::slot.

double sym_det(const double* a, int n);

/// Inverse of a symmetric matrix into packed form. Returns false if the
/// determinant vanishes.
bool sym_inverse(const double* a, int n, double* out);

/// Lower-triangular Cholesky factor (row-major dense, n*n entries used).
/// Returns false if the matrix is not positive-definite.
bool sym_cholesky(const double* a, int n, double* lower);

/// Eigenvalues in ascending order (cyclic Jacobi for n=3).
std::array<double, 3> sym_eigenvalues(const double* a, int n);

double sym_eigen_min(const double* a, int n);

/// Smallest lambda with det(a - lambda g) = 0, g positive-definite:
/// the generalized eigenvalue of the pair via Cholesky whitening.
double rel_eigen_min(const double* a, const double* g, int n);

}  // namespace geoflow::linalg
