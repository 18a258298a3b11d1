#include "specmap/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace specmap {

Matrix svd_soft_threshold(const Matrix& y, Real mu) {
  if (!y.allFinite()) throw InvalidInput("svd_soft_threshold: non-finite input");
  if (mu < 0) throw InvalidInput("svd_soft_threshold: mu must be nonnegative");
  if (mu == 0) return y;
  Eigen::BDCSVD<Matrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = (svd.singularValues().array() - mu).max(0.0).matrix();
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Real nuclear_norm(const Matrix& m) {
  return Eigen::BDCSVD<Matrix>(m).singularValues().sum();
}

namespace {

Real masked_residual_sq(const Matrix& psi, const Matrix& s, const BoolArray& mask) {
  Real acc = 0;
  for (Eigen::Index j = 0; j < psi.cols(); ++j)
    for (Eigen::Index i = 0; i < psi.rows(); ++i)
      if (mask(i, j)) {
        Real d = psi(i, j) - s(i, j);
        acc += d * d;
      }
  return acc;
}

}  // namespace

SvtResult svt_complete(const ObservedMatrix& obs, const SvtConfig& cfg, const Matrix* warm) {
  obs.validate();
  cfg.validate();
  if (obs.observed_count() == 0)
    throw InvalidInput("svt_complete: mask has no observed entries");
  if (!obs.values.allFinite()) throw InvalidInput("svt_complete: non-finite input");

  const Matrix& psi = obs.values;
  const BoolArray& mask = obs.mask;
  const Real tau = cfg.delta * cfg.mu / 2;

  SvtResult res;
  res.completed = warm ? *warm : Matrix::Zero(psi.rows(), psi.cols());
  Matrix& s = res.completed;

  Real r_prev = std::sqrt(masked_residual_sq(psi, s, mask));
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Matrix y = s;
    for (Eigen::Index j = 0; j < psi.cols(); ++j)
      for (Eigen::Index i = 0; i < psi.rows(); ++i)
        if (mask(i, j)) y(i, j) += cfg.delta * (psi(i, j) - s(i, j));

    Real nn = 0;
    if (tau > 0) {
      Eigen::BDCSVD<Matrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
      Vector sv = (svd.singularValues().array() - tau).max(0.0).matrix();
      s = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
      nn = sv.sum();
    } else {
      s = y;
      if (cfg.mu > 0) nn = nuclear_norm(s);
    }

    Real rsq = masked_residual_sq(psi, s, mask);
    Real r = std::sqrt(rsq);
    res.objective_trace.push_back(rsq + cfg.mu * nn);
    res.iterations = it;

    Real rel = (r_prev > 0) ? std::abs(r - r_prev) / r_prev : (r > 0 ? 1.0 : 0.0);
    if (rel < cfg.tol) {
      res.converged = true;
      break;
    }
    r_prev = r;
  }
  return res;
}

namespace {

struct PivotState {
  Matrix gram;
  Vector c;
  Real ridge = 0;

  Vector solve_free(const std::vector<int>& free_set, bool& ok) const {
    const int nf = static_cast<int>(free_set.size());
    Matrix gff(nf, nf);
    Vector cf(nf);
    for (int a = 0; a < nf; ++a) {
      cf[a] = c[free_set[a]];
      for (int b = 0; b < nf; ++b) gff(a, b) = gram(free_set[a], free_set[b]);
    }
    if (ridge > 0) gff.diagonal().array() += ridge;
    Eigen::LDLT<Matrix> ldlt(gff);
    ok = ldlt.info() == Eigen::Success &&
         (nf == 0 || ldlt.vectorD().minCoeff() > 0);
    if (!ok) return Vector::Zero(nf);
    return ldlt.solve(cf);
  }
};

}  // namespace

Vector nnls_solve_normal(const Matrix& gram, const Vector& c, Real tol, NnlsDiagnostics* diag) {
  const int n = static_cast<int>(c.size());
  if (gram.rows() != n || gram.cols() != n)
    throw InvalidInput("nnls_solve_normal: shape mismatch");
  if (!gram.allFinite() || !c.allFinite())
    throw InvalidInput("nnls_solve_normal: non-finite input");

  NnlsDiagnostics local;
  NnlsDiagnostics& d = diag ? *diag : local;
  d = NnlsDiagnostics{};

  PivotState st{gram, c, 0.0};
  const Real scale = std::max<Real>(1.0, c.lpNorm<Eigen::Infinity>());
  const Real abs_tol = tol * scale;

  std::vector<bool> free_mask(n, false);
  Vector x = Vector::Zero(n);
  Vector w = -c;  // gradient G x - c at x = 0

  auto refresh = [&](bool& ok) {
    std::vector<int> fs;
    for (int i = 0; i < n; ++i)
      if (free_mask[i]) fs.push_back(i);
    Vector xf = st.solve_free(fs, ok);
    if (!ok && st.ridge == 0) {
      // Singular principal submatrix: trace-scaled ridge instead of failing.
      st.ridge = 1e-12 * std::max<Real>(1.0, gram.trace());
      d.ridged = true;
      xf = st.solve_free(fs, ok);
    }
    if (!ok) {
      std::vector<int> cols(fs.begin(), fs.end());
      throw DegenerateDesign("nnls: rank-deficient design on free set", cols);
    }
    x.setZero();
    for (size_t a = 0; a < fs.size(); ++a) x[fs[a]] = xf[a];
    w = gram * x - c;
  };

  int best_infeasible = n + 1;
  int backoff = 3;
  const int max_iter = 10 * n + 30;
  for (int it = 0; it < max_iter; ++it) {
    d.iterations = it;
    std::vector<int> h1, h2;
    for (int i = 0; i < n; ++i) {
      if (free_mask[i] && x[i] < -abs_tol) h1.push_back(i);
      if (!free_mask[i] && w[i] < -abs_tol) h2.push_back(i);
    }
    const int ninf = static_cast<int>(h1.size() + h2.size());
    if (ninf == 0) break;

    if (ninf < best_infeasible) {
      best_infeasible = ninf;
      backoff = 3;
      for (int i : h1) free_mask[i] = false;
      for (int i : h2) free_mask[i] = true;
    } else if (backoff > 0) {
      --backoff;
      for (int i : h1) free_mask[i] = false;
      for (int i : h2) free_mask[i] = true;
    } else {
      // Murty's single exchange on the largest infeasible index.
      int imax = -1;
      if (!h1.empty()) imax = h1.back();
      if (!h2.empty()) imax = std::max(imax, h2.back());
      free_mask[imax] = !free_mask[imax];
    }
    bool ok = false;
    refresh(ok);
  }

  Real kkt = 0;
  for (int i = 0; i < n; ++i) {
    if (free_mask[i])
      kkt = std::max(kkt, std::abs(w[i]));
    else
      kkt = std::max(kkt, std::max<Real>(0.0, -w[i]));
    kkt = std::max(kkt, std::max<Real>(0.0, -x[i]));
  }
  d.kkt_residual = kkt / scale;
  x = x.cwiseMax(0.0);
  return x;
}

Vector nnls_solve(const NnlsProblem& p, Real tol, NnlsDiagnostics* diag) {
  if (p.design.rows() != p.target.size())
    throw InvalidInput("nnls_solve: design rows must match target length");
  if (p.design.rows() < 1 || p.design.cols() < 1)
    throw InvalidInput("nnls_solve: empty problem");
  if (!p.design.allFinite() || !p.target.allFinite())
    throw InvalidInput("nnls_solve: non-finite input");
  Matrix gram = p.design.transpose() * p.design;
  Vector c = p.design.transpose() * p.target;
  return nnls_solve_normal(gram, c, tol, diag);
}

Matrix psd_pinv(const Matrix& m, int min_rank, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  const Real lmax = eig.eigenvalues().maxCoeff();
  if (!(lmax > 0)) throw DegenerateDesign(std::string(what) + ": zero moment matrix", {});
  const Real tol = 1e-10 * lmax;
  Matrix inv = Matrix::Zero(m.rows(), m.cols());
  int rank = 0;
  for (int i = 0; i < eig.eigenvalues().size(); ++i) {
    if (eig.eigenvalues()[i] > tol) {
      inv += eig.eigenvectors().col(i) * eig.eigenvectors().col(i).transpose() /
             eig.eigenvalues()[i];
      ++rank;
    }
  }
  if (rank < min_rank) {
    Eigen::Index weakest;
    eig.eigenvalues().minCoeff(&weakest);
    Vector null_dir = eig.eigenvectors().col(weakest);
    std::ostringstream msg;
    msg << what << ": moment matrix rank " << rank << " below " << min_rank
        << "; deficient direction ~ [";
    std::vector<int> cols;
    for (int d = 0; d < null_dir.size(); ++d) {
      msg << (d ? ", " : "") << null_dir[d];
      if (std::abs(null_dir[d]) > 0.3) cols.push_back(d);
    }
    msg << "]";
    throw DegenerateDesign(msg.str(), cols);
  }
  return inv;
}

Vector ridge_weighted_ls(const Matrix& design, const Vector& weights,
                         const Vector& target, const Vector& ridge) {
  const Eigen::Index m = design.rows();
  const Eigen::Index n = design.cols();
  if (weights.size() != m || target.size() != m || ridge.size() != n)
    throw InvalidInput("ridge_weighted_ls: inconsistent dimensions");
  if (weights.minCoeff() < 0 || ridge.minCoeff() < 0)
    throw InvalidInput("ridge_weighted_ls: weights and ridge must be nonnegative");

  Vector sw = weights.cwiseSqrt();
  Matrix stacked(m + n, n);
  stacked.topRows(m) = sw.asDiagonal() * design;
  stacked.bottomRows(n) = ridge.cwiseSqrt().asDiagonal();
  Vector rhs = Vector::Zero(m + n);
  rhs.head(m) = sw.cwiseProduct(target);

  Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
  qr.setThreshold(1e-12);
  if (qr.rank() < n) {
    Matrix normal = design.transpose() * weights.asDiagonal() * design;
    normal.diagonal() += ridge;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(normal);
    throw ConditioningError("ridge_weighted_ls: singular normal matrix",
                            eig.eigenvalues().minCoeff());
  }
  return qr.solve(rhs);
}

}  // namespace specmap
