#pragma once

#include "hyfsi/assembly.hpp"

namespace hyfsi {

struct SolveInfo {
  double relative_residual = 0.0;
  int refinement_steps = 0;
};

// Sparse LU with COLAMD ordering followed by up to two steps of iterative
// refinement. Throws SolverError naming an empty row/column when the matrix
// is structurally singular, or -1 when the factorization fails otherwise.
Vector sparse_direct_solve(const SparseMatrix& A, const Vector& b, SolveInfo* info = nullptr);

// Spectral condition number from a dense SVD (small systems only).
double condition_number(const SparseMatrix& A);

}  // namespace hyfsi
