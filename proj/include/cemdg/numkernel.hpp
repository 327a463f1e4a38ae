#ifndef CEMDG_NUMKERNEL_HPP
#define CEMDG_NUMKERNEL_HPP

#include <vector>

#include <Eigen/SparseCholesky>

#include "cemdg/types.hpp"

namespace cemdg {

/// Reusable sparse SPD factorization (simplicial LDLT, deterministic AMD
/// ordering). Throws SolverError on breakdown.
class SpdSolver {
 public:
  explicit SpdSolver(const SparseMat& A);

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& B) const;
  Eigen::Index dimension() const { return ldlt_.rows(); }

 private:
  Eigen::SimplicialLDLT<SparseMat> ldlt_;
};

/// Solve M x = b for sparse SPD M to a relative residual tolerance.
/// Direct factorization up to `direct_limit` unknowns, preconditioned
/// conjugate gradients beyond. Deterministic for fixed inputs.
Vector solve_spd(const SparseMat& M, const Vector& b, double tol = 1e-10,
                 Eigen::Index direct_limit = 200000);

/// x = (A + W W^T)^{-1} b through the Woodbury identity, reusing a
/// factorization of the sparse part. W is dense (few columns).
Vector solve_lowrank_update(const SpdSolver& base, const Matrix& W, const Vector& b);

struct EigenPairs {
  Vector values;   // ascending
  Matrix vectors;  // B-orthonormal columns, sign convention applied
};

/// Smallest `count` eigenpairs of A v = lambda B v with A symmetric PSD and
/// B SPD, both dense. Vectors satisfy v' B v = 1; the first component of
/// each vector with magnitude > 1e-12 is made positive.
EigenPairs generalized_eig_sym(const Matrix& A, const Matrix& B, int count);

struct PivotedSolveResult {
  Vector x;                 // full-length coefficients, dropped entries zero
  std::vector<int> dropped; // ascending indices of dropped unknowns
};

/// Dense SPD solve with diagonal-pivoted Cholesky; unknowns whose pivot
/// falls below drop_tol times the largest pivot are dropped (coefficient
/// forced to zero) and reported. Throws if everything is dropped.
PivotedSolveResult solve_pivoted(const Matrix& A, const Vector& b, double drop_tol = 1e-12);

}  // namespace cemdg

#endif
