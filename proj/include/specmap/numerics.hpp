#pragma once

#include "specmap/types.hpp"

#include <optional>

namespace specmap {

/// Partially observed matrix; `mask(i,j)` marks which entries of `values`
/// carry data. Unobserved entries are ignored by every consumer.
struct ObservedMatrix {
  Matrix values;
  BoolArray mask;

  void validate() const {
    if (values.rows() != mask.rows() || values.cols() != mask.cols())
      throw InvalidInput("ObservedMatrix: mask and values shapes differ");
  }
  Eigen::Index observed_count() const { return mask.count(); }
};

struct SvtConfig {
  Real mu = 0.0;       // nuclear-norm weight
  Real delta = 1.0;    // step size, must lie in (0, 2)
  int max_iter = 500;
  Real tol = 1e-6;     // relative change of the observed-entry residual

  void validate() const {
    if (mu < 0) throw InvalidInput("SvtConfig: mu must be nonnegative");
    if (!(delta > 0 && delta < 2)) throw InvalidInput("SvtConfig: delta must lie in (0,2)");
    if (max_iter < 1) throw InvalidInput("SvtConfig: max_iter must be positive");
    if (!(tol > 0)) throw InvalidInput("SvtConfig: tol must be positive");
  }
};

struct SvtResult {
  Matrix completed;
  bool converged = false;
  int iterations = 0;
  /// Value of sum_obs (psi - s)^2 + mu * ||s||_* after each iteration.
  std::vector<Real> objective_trace;
};

/// Singular-value soft shrinkage: U diag((sigma_i - mu)_+) V^T.
/// Minimizer of 0.5 ||X - Y||_F^2 + mu ||X||_*.
Matrix svd_soft_threshold(const Matrix& y, Real mu);

/// Nuclear norm (sum of singular values).
Real nuclear_norm(const Matrix& m);

/// Solves  min_S  sum_{(i,j) observed} (psi_ij - s_ij)^2 + mu ||S||_*
/// by soft-thresholded SVD iterations
///   Y^k = S^k + delta P_obs(psi - S^k),  S^{k+1} = shrink(Y^k, delta*mu/2),
/// started from `warm` (zero when absent). The iteration is a proximal
/// gradient step on the objective, so delta in (0,1] gives a monotone
/// objective and delta in (0,2) still converges.
SvtResult svt_complete(const ObservedMatrix& obs, const SvtConfig& cfg,
                       const Matrix* warm = nullptr);

struct NnlsProblem {
  Matrix design;   // m x n
  Vector target;   // m
};

struct NnlsDiagnostics {
  bool ridged = false;       // normal matrix needed a trace-scaled ridge
  Real kkt_residual = 0.0;   // normalized complementarity residual
  int iterations = 0;
};

/// Nonnegative least squares via block principal pivoting with a single
/// exchange fallback; assumes a strictly convex problem. Returns x >= 0 with
/// KKT residual below `tol` on the normalized gradient.
Vector nnls_solve(const NnlsProblem& p, Real tol = 1e-8,
                  NnlsDiagnostics* diag = nullptr);

/// Same solver operating directly on the normal equations
/// G = A^T A (positive definite), c = A^T b.
Vector nnls_solve_normal(const Matrix& gram, const Vector& c, Real tol = 1e-8,
                         NnlsDiagnostics* diag = nullptr);

/// argmin_x ||diag(sqrt(w)) (y - A x)||^2 + x^T diag(ridge) x
/// via a column-pivoted QR of the weighted, ridge-augmented stack.
Vector ridge_weighted_ls(const Matrix& design, const Vector& weights,
                         const Vector& target, const Vector& ridge);

/// Rank-revealing pseudo-inverse of a positive semidefinite matrix
/// (eigenvalues below 1e-10 of the largest are treated as null). Throws
/// DegenerateDesign naming the weakest direction when the rank falls below
/// `min_rank`. The second-order local design duplicates its mixed term, so
/// the moment matrices here are rank deficient by exactly one per source;
/// consumers pass the rank they actually require.
Matrix psd_pinv(const Matrix& m, int min_rank, const char* what);

}  // namespace specmap
