#include "hyfsi/linear_solver.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseLU>
#include <spdlog/spdlog.h>

namespace hyfsi {

namespace {

int structurally_empty_dof(const SparseMatrix& A) {
  std::vector<char> row_used(A.rows(), 0);
  for (int c = 0; c < A.outerSize(); ++c) {
    bool col_used = false;
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) {
      if (it.value() != 0.0) {
        row_used[it.row()] = 1;
        col_used = true;
      }
    }
    if (!col_used) return c;
  }
  for (int r = 0; r < A.rows(); ++r)
    if (!row_used[r]) return r;
  return -1;
}

}  // namespace

Vector sparse_direct_solve(const SparseMatrix& A, const Vector& b, SolveInfo* info) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw SolverError("dimension mismatch", -1);
  if (A.rows() == 0) return Vector();
  if (const int d = structurally_empty_dof(A); d >= 0) {
    throw SolverError("singular system: empty row/column at dof " + std::to_string(d), d);
  }
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) {
    throw SolverError("sparse LU factorization failed: " + lu.lastErrorMessage(), -1);
  }
  Vector x = lu.solve(b);
  const double bnorm = std::max(b.norm(), 1e-300);
  double rel = (A * x - b).norm() / bnorm;
  int steps = 0;
  while (rel > 1e-12 && steps < 2) {
    const Vector r = b - A * x;
    x += lu.solve(r);
    rel = (A * x - b).norm() / bnorm;
    ++steps;
  }
  if (!x.allFinite()) throw SolverError("linear solve produced non-finite values", -1);
  if (rel > 1e-10) spdlog::warn("linear solve: relative residual {:.3e} after refinement", rel);
  if (info) {
    info->relative_residual = rel;
    info->refinement_steps = steps;
  }
  return x;
}

double condition_number(const SparseMatrix& A) {
  const Eigen::MatrixXd D(A);
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(D);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  return s[0] / s[s.size() - 1];
}

}  // namespace hyfsi
