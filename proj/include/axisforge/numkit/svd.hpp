#pragma once

#include <vector>

#include "axisforge/numkit/matrix.hpp"

namespace axisforge::numkit {

// Thin SVD M = U diag(s) Vt with r = min(rows, cols).
//   u:  rows x r, orthonormal columns
//   s:  r singular values, non-increasing, non-negative
//   vt: r x cols, orthonormal rows
// Sign convention: every row of vt has its largest-magnitude component
// positive (ties go to the lowest index); the matching column of u is
// flipped with it.
struct SvdResult {
  Matrix u;
  std::vector<double> s;
  Matrix vt;
};

// One-sided Jacobi (Hestenes). Throws DataError for an empty matrix or a
// non-finite entry (the message names the row and column).
SvdResult thin_svd(const Matrix& m);

}  // namespace axisforge::numkit
