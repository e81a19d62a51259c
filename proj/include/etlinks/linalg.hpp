#pragma once

#include <cstddef>
#include <vector>

#include "etlinks/matrix.hpp"

namespace etlinks {

struct SvdResult {
  Matrix u;                            // m x n, orthonormal columns
  std::vector<double> singular_values; // descending
  Matrix v;                            // n x n, orthogonal
  std::size_t rank = 0;                // singular values above the noise floor
  int sweeps = 0;
};

/// One-sided (Hestenes) Jacobi SVD of an m x n matrix with m >= n.
/// Column pairs are rotated until every pair satisfies
/// |a_p . a_q| <= tolerance * |a_p| |a_q|. Columns of `u` belonging to
/// singular values below the rank threshold are completed to an orthonormal
/// set, so `u` is always orthonormal.
SvdResult jacobi_svd(const Matrix& a, double tolerance = 1e-12, int max_sweeps = 80);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // row i is the unit eigenvector of values[i]
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Stops when the
/// off-diagonal Frobenius norm is <= tolerance times the full norm.
SymmetricEigen jacobi_eigen_symmetric(const Matrix& a, double tolerance = 1e-12,
                                      int max_sweeps = 80);

}  // namespace etlinks
