#include "cemdg/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>

namespace cemdg {

SpdSolver::SpdSolver(const SparseMat& A) {
  ldlt_.compute(A);
  if (ldlt_.info() != Eigen::Success)
    throw SolverError("SpdSolver: LDLT factorization failed (matrix not SPD?)");
}

Vector SpdSolver::solve(const Vector& b) const { return ldlt_.solve(b); }
Matrix SpdSolver::solve(const Matrix& B) const { return ldlt_.solve(B); }

Vector solve_spd(const SparseMat& M, const Vector& b, double tol, Eigen::Index direct_limit) {
  if (M.rows() != M.cols() || M.rows() != b.size())
    throw ConfigError("solve_spd: dimension mismatch");
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());

  Vector x;
  if (M.rows() <= direct_limit) {
    SpdSolver solver(M);
    x = solver.solve(b);
    double rel = (M * x - b).norm() / bnorm;
    if (rel > tol) {
      const Vector correction = b - M * x;
      x += solver.solve(correction);  // one refinement step
      rel = (M * x - b).norm() / bnorm;
    }
    if (rel > tol)
      throw SolverError("solve_spd: direct solve residual " + std::to_string(rel) +
                        " above tolerance");
  } else {
    Eigen::ConjugateGradient<SparseMat, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(0.1 * tol);
    cg.setMaxIterations(20 * M.rows());
    cg.compute(M);
    if (cg.info() != Eigen::Success)
      throw SolverError("solve_spd: preconditioner setup failed");
    x = cg.solve(b);
    const double rel = (M * x - b).norm() / bnorm;
    if (rel > tol)
      throw SolverError("solve_spd: CG residual " + std::to_string(rel) + " above tolerance");
  }
  return x;
}

Vector solve_lowrank_update(const SpdSolver& base, const Matrix& W, const Vector& b) {
  Vector z = base.solve(b);
  if (W.cols() == 0) return z;
  const Matrix Y = base.solve(W);
  Matrix C = W.transpose() * Y;
  C.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(C);
  if (llt.info() != Eigen::Success)
    throw SolverError("solve_lowrank_update: capacitance matrix not SPD");
  const Vector t = llt.solve(W.transpose() * z);
  return z - Y * t;
}

EigenPairs generalized_eig_sym(const Matrix& A, const Matrix& B, int count) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || B.cols() != n)
    throw ConfigError("generalized_eig_sym: dimension mismatch");
  if (count < 1 || count > n)
    throw ConfigError("generalized_eig_sym: invalid pair count");
  {
    Eigen::LLT<Matrix> chol(B);
    if (chol.info() != Eigen::Success)
      throw SolverError("generalized_eig_sym: B is not SPD");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(A, B,
                                                       Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success)
    throw SolverError("generalized_eig_sym: eigensolver failed");

  EigenPairs pairs;
  pairs.values = ges.eigenvalues().head(count);
  pairs.vectors = ges.eigenvectors().leftCols(count);
  for (Eigen::Index j = 0; j < pairs.vectors.cols(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = pairs.vectors(i, j);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) pairs.vectors.col(j) = -pairs.vectors.col(j);
        break;
      }
    }
  }
  return pairs;
}

PivotedSolveResult solve_pivoted(const Matrix& A, const Vector& b, double drop_tol) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || b.size() != n) throw ConfigError("solve_pivoted: dimension mismatch");
  if (n == 0) throw SolverError("solve_pivoted: empty system");

  // healthy systems take the plain Cholesky fast path
  {
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-10) {
      PivotedSolveResult r;
      r.x = llt.solve(b);
      return r;
    }
  }

  // diagonal-pivoted Cholesky with explicit permutation; unknowns whose
  // pivot falls below drop_tol * max pivot are numerically dependent on the
  // preceding ones and get dropped
  Matrix C = A;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Eigen::Index rank = n;
  double max_pivot = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index jbest = k;
    double piv = C(k, k);
    for (Eigen::Index j = k + 1; j < n; ++j)
      if (C(j, j) > piv) {
        piv = C(j, j);
        jbest = j;
      }
    if (k == 0) max_pivot = piv;
    if (!(piv > 0.0) || piv < drop_tol * max_pivot) {
      rank = k;
      break;
    }
    if (jbest != k) {
      C.row(k).swap(C.row(jbest));
      C.col(k).swap(C.col(jbest));
      std::swap(perm[k], perm[jbest]);
    }
    const double s = std::sqrt(piv);
    C(k, k) = s;
    const Eigen::Index m = n - k - 1;
    if (m > 0) {
      C.col(k).tail(m) /= s;
      C.bottomRightCorner(m, m).noalias() -= C.col(k).tail(m) * C.col(k).tail(m).transpose();
    }
  }
  if (rank == 0) throw SolverError("solve_pivoted: all pivots dropped");

  Vector pb(rank);
  for (Eigen::Index i = 0; i < rank; ++i) pb[i] = b[perm[i]];
  const auto L = C.topLeftCorner(rank, rank);
  Vector y = L.triangularView<Eigen::Lower>().solve(pb);
  Vector z = L.triangularView<Eigen::Lower>().adjoint().solve(y);

  PivotedSolveResult r;
  r.x = Vector::Zero(n);
  for (Eigen::Index i = 0; i < rank; ++i) r.x[perm[i]] = z[i];
  for (Eigen::Index i = rank; i < n; ++i) r.dropped.push_back(perm[i]);
  std::sort(r.dropped.begin(), r.dropped.end());
  return r;
}

}  // namespace cemdg
