#include "specmap/solver.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

namespace specmap {

std::vector<int> InterpSet::materialize(const GridSpec& grid) const {
  std::vector<int> out;
  switch (kind) {
    case Kind::Full:
      out.resize(grid.cell_count());
      for (int c = 0; c < grid.cell_count(); ++c) out[c] = c;
      break;
    case Kind::Stride: {
      if (stride < 1) throw ConfigError("InterpSet: stride must be >= 1");
      for (int i = 0; i < grid.n1; i += stride)
        for (int j = 0; j < grid.n2; j += stride) out.push_back(i * grid.n2 + j);
      break;
    }
    case Kind::Explicit:
      out = cells;
      for (int c : out)
        if (c < 0 || c >= grid.cell_count())
          throw ConfigError("InterpSet: cell index out of range");
      break;
  }
  if (out.empty()) throw ConfigError("InterpSet: empty interpolation set");
  return out;
}

std::vector<CellCache> build_cell_caches(const std::vector<CellWindow>& windows,
                                         const MeasurementSet& meas) {
  const int k_bands = meas.k();
  std::vector<CellCache> caches;
  caches.reserve(windows.size());
  for (const auto& w : windows) {
    CellCache c;
    c.window = w;
    const int mw = static_cast<int>(w.sensor.size());
    c.design.resize(7, mw);
    c.band_moment.assign(k_bands, Eigen::Matrix<Real, 7, 7>::Zero());
    c.band_rhs = Matrix::Zero(7, k_bands);
    c.band_sq = Vector::Zero(k_bands);
    for (int t = 0; t < mw; ++t) {
      const int m = w.sensor[t];
      const Real kap = w.weight[t];
      Eigen::Matrix<Real, 7, 1> x = design_vector(meas.locations[m], w.center);
      c.design.col(t) = x;
      Eigen::Matrix<Real, 7, 7> xxt = x * x.transpose();
      for (int k = 0; k < k_bands; ++k) {
        if (!meas.band_mask(m, k)) continue;
        const Real g = meas.readings(m, k);
        c.band_moment[k] += kap * xxt;
        c.band_rhs.col(k) += (kap * g) * x;
        c.band_sq[k] += kap * g * g;
      }
    }
    caches.push_back(std::move(c));
  }
  return caches;
}

namespace detail {

std::pair<Matrix, Vector> theta_normal_system(const CellCache& cache, const Matrix& phi) {
  const int r_count = static_cast<int>(phi.rows());
  const int k_bands = static_cast<int>(phi.cols());
  const int n = 7 * r_count;
  Matrix g = Matrix::Zero(n, n);
  Vector rhs = Vector::Zero(n);
  for (int k = 0; k < k_bands; ++k) {
    const auto& t = cache.band_moment[k];
    for (int r = 0; r < r_count; ++r) {
      for (int r2 = 0; r2 < r_count; ++r2)
        g.block<7, 7>(7 * r, 7 * r2) += phi(r, k) * phi(r2, k) * t;
      rhs.segment<7>(7 * r) += phi(r, k) * cache.band_rhs.col(k);
    }
  }
  return {std::move(g), std::move(rhs)};
}

}  // namespace detail

bool update_theta(const CellCache& cache, const Matrix& phi, const Vector& s_at_cell,
                  Real nu, Real theta_ridge, Eigen::Ref<Vector> theta_out) {
  const int r_count = static_cast<int>(phi.rows());
  auto [g, rhs] = detail::theta_normal_system(cache, phi);
  for (int r = 0; r < r_count; ++r) {
    g(7 * r, 7 * r) += nu;
    rhs[7 * r] += nu * s_at_cell[r];
  }

  // The design vector carries the mixed quadratic term twice, so the normal
  // matrix has one exact null direction per source. Solving in the reduced
  // basis that merges the pair (and splitting the coefficient evenly on the
  // way back) is the minimum-norm solution of the full system.
  const int n_red = 6 * r_count;
  Matrix basis = Matrix::Zero(7 * r_count, n_red);
  for (int r = 0; r < r_count; ++r) {
    basis(7 * r + 0, 6 * r + 0) = 1;
    basis(7 * r + 1, 6 * r + 1) = 1;
    basis(7 * r + 2, 6 * r + 2) = 1;
    basis(7 * r + 3, 6 * r + 3) = 1;
    basis(7 * r + 4, 6 * r + 4) = 0.5;
    basis(7 * r + 5, 6 * r + 4) = 0.5;
    basis(7 * r + 6, 6 * r + 5) = 1;
  }
  Matrix g_red = basis.transpose() * g * basis;
  Vector rhs_red = basis.transpose() * rhs;

  auto solvable = [](const Eigen::LDLT<Matrix>& f) {
    if (f.info() != Eigen::Success) return false;
    const Real dmax = f.vectorD().maxCoeff();
    return dmax > 0 && f.vectorD().minCoeff() > 1e-12 * dmax;
  };
  Eigen::LDLT<Matrix> ldlt(g_red);
  if (!solvable(ldlt)) {
    // Stabilize everything except the constant terms, which carry the
    // field estimates.
    const Real scale =
        theta_ridge > 0 ? theta_ridge : 1e-10 * std::max<Real>(1.0, g_red.trace() / n_red);
    for (int idx = 0; idx < n_red; ++idx)
      if (idx % 6 != 0) g_red(idx, idx) += scale;
    ldlt.compute(g_red);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0) return false;
  }
  Vector reduced = ldlt.solve(rhs_red);
  theta_out = basis * reduced;
  return theta_out.allFinite();
}

namespace {

LocalModel update_theta_all(const std::vector<CellCache>& caches, const Matrix& phi,
                            const std::vector<Matrix>& fields, const GridSpec& grid, Real nu,
                            Real theta_ridge, LocalModel previous, int* skipped,
                            std::vector<std::string>* warnings) {
  const int r_count = static_cast<int>(phi.rows());
  LocalModel local = std::move(previous);
  local.n_sources = r_count;
  if (local.theta.rows() != 7 * r_count || local.theta.cols() != static_cast<Eigen::Index>(caches.size())) {
    local.theta = Matrix::Zero(7 * r_count, caches.size());
    local.cells.resize(caches.size());
    for (size_t p = 0; p < caches.size(); ++p) local.cells[p] = caches[p].window.cell_index;
  }
  Vector s_here(r_count);
  for (size_t p = 0; p < caches.size(); ++p) {
    const int i = local.cells[p] / grid.n2, j = local.cells[p] % grid.n2;
    for (int r = 0; r < r_count; ++r) s_here[r] = fields.empty() ? 0.0 : fields[r](i, j);
    if (!update_theta(caches[p], phi, s_here, nu, theta_ridge, local.theta.col(p))) {
      if (skipped) ++*skipped;
      if (warnings)
        warnings->push_back("theta update skipped at cell " + std::to_string(local.cells[p]) +
                            ": ill-conditioned normal matrix");
    }
  }
  return local;
}

}  // namespace

Matrix update_phi(const std::vector<CellCache>& caches, const LocalModel& local) {
  const int r_count = local.n_sources;
  const int k_bands = static_cast<int>(caches.empty() ? 0 : caches[0].band_rhs.cols());
  if (caches.empty()) throw InvalidInput("update_phi: no cells contributed");

  Matrix phi(r_count, k_bands);
  Real total_gram = 0;
  for (int k = 0; k < k_bands; ++k) {
    Matrix gram = Matrix::Zero(r_count, r_count);
    Vector rhs = Vector::Zero(r_count);
    for (size_t p = 0; p < caches.size(); ++p) {
      auto theta_mat = local.cell_matrix(static_cast<int>(p));  // 7 x R
      gram.noalias() += theta_mat.transpose() * caches[p].band_moment[k] * theta_mat;
      rhs.noalias() += theta_mat.transpose() * caches[p].band_rhs.col(k);
    }
    total_gram += gram.cwiseAbs().sum();
    phi.col(k) = nnls_solve_normal(gram, rhs);
  }
  if (total_gram <= 0)
    throw Error("update_phi: degenerate spectrum, the stacked design is zero");
  return phi;
}

std::vector<Matrix> update_fields(const LocalModel& local, const GridSpec& grid,
                                  const std::vector<Real>& threshold, const SvtConfig& svt,
                                  const std::vector<Matrix>* warm) {
  const int r_count = local.n_sources;
  std::vector<Matrix> fields(r_count);
  ObservedMatrix obs;
  obs.values = Matrix::Zero(grid.n1, grid.n2);
  obs.mask = BoolArray::Constant(grid.n1, grid.n2, false);
  for (int c : local.cells) obs.mask(c / grid.n2, c % grid.n2) = true;
  for (int r = 0; r < r_count; ++r) {
    for (size_t p = 0; p < local.cells.size(); ++p)
      obs.values(local.cells[p] / grid.n2, local.cells[p] % grid.n2) = local.alpha(static_cast<int>(p), r);
    SvtConfig cfg = svt;
    cfg.mu = threshold[r];
    SvtResult res = svt_complete(obs, cfg, warm ? &(*warm)[r] : nullptr);
    fields[r] = std::move(res.completed);
  }
  return fields;
}

Real objective_value(const std::vector<CellCache>& caches, const LocalModel& local,
                     const Matrix& phi, const std::vector<Matrix>& fields,
                     const MeasurementSet& meas, Real nu, const std::vector<Real>& mu_eff) {
  const int r_count = static_cast<int>(phi.rows());
  const int k_bands = static_cast<int>(phi.cols());
  Real residual = 0;
  for (size_t p = 0; p < caches.size(); ++p) {
    const CellCache& c = caches[p];
    auto theta_mat = local.cell_matrix(static_cast<int>(p));
    Matrix f = c.design.transpose() * theta_mat;  // Mw x R polynomial values
    for (int t = 0; t < f.rows(); ++t) {
      const int m = c.window.sensor[t];
      const Real kap = c.window.weight[t];
      for (int k = 0; k < k_bands; ++k) {
        if (!meas.band_mask(m, k)) continue;
        Real pred = 0;
        for (int r = 0; r < r_count; ++r) pred += f(t, r) * phi(r, k);
        const Real d = meas.readings(m, k) - pred;
        residual += kap * d * d;
      }
    }
  }
  Real coupling = 0;
  if (nu > 0 && !fields.empty()) {
    const int n2 = static_cast<int>(fields[0].cols());
    for (size_t p = 0; p < caches.size(); ++p) {
      const int cell = local.cells[p];
      for (int r = 0; r < r_count; ++r) {
        const Real d = local.alpha(static_cast<int>(p), r) - fields[r](cell / n2, cell % n2);
        coupling += d * d;
      }
    }
  }
  Real nuclear = 0;
  for (int r = 0; r < r_count; ++r)
    if (mu_eff[r] > 0) nuclear += mu_eff[r] * nuclear_norm(fields[r]);
  return residual + nu * coupling + nuclear;
}

Estimate solve(const MeasurementSet& meas, const GridSpec& grid, const KernelConfig& kcfg,
               const SolverConfig& cfg, int n_sources, const InitOptions& init,
               std::ostream* progress) {
  cfg.validate();
  if (n_sources < 1) throw ConfigError("solve: n_sources must be >= 1");
  const int r_count = n_sources;
  const int k_bands = meas.k();

  std::vector<int> cells = cfg.interp_set.materialize(grid);
  std::vector<CellWindow> windows = kernel_weights(cells, grid, meas.locations, kcfg);
  std::vector<CellCache> caches = build_cell_caches(windows, meas);

  Estimate est;
  est.mu_effective.assign(r_count, cfg.mu);

  // Spectrum init: flat rows for one source; independent log-uniform draws
  // per entry otherwise. The alternation barely moves between separations of
  // near-equal fit, so the start has to be strongly asymmetric for the
  // sources to come apart.
  Matrix phi;
  if (init.phi0) {
    phi = *init.phi0;
    if (phi.rows() != r_count || phi.cols() != k_bands)
      throw ConfigError("solve: phi0 has the wrong shape");
  } else {
    phi = Matrix::Ones(r_count, k_bands);
    if (r_count >= 2) {
      Rng rng(init.seed);
      std::uniform_real_distribution<Real> unif(-1.0, 1.0);
      for (int r = 0; r < r_count; ++r)
        for (int k = 0; k < k_bands; ++k) phi(r, k) = std::exp(unif(rng));
    }
  }
  for (int r = 0; r < r_count; ++r) phi.row(r) *= k_bands / phi.row(r).sum();

  std::vector<Matrix> fields =
      init.s0 ? *init.s0 : std::vector<Matrix>(r_count, Matrix::Zero(grid.n1, grid.n2));

  LocalModel local = update_theta_all(caches, phi, fields, grid, 0.0, cfg.theta_ridge, {},
                                      &est.skipped_cells, &est.warnings);

  if (cfg.mu_spectral && cfg.mu > 0) {
    // Calibrate the per-source nuclear coefficient against the leading
    // singular value of the initial constant-term observations.
    for (int r = 0; r < r_count; ++r) {
      Matrix psi = Matrix::Zero(grid.n1, grid.n2);
      for (size_t p = 0; p < local.cells.size(); ++p)
        psi(local.cells[p] / grid.n2, local.cells[p] % grid.n2) = local.alpha(static_cast<int>(p), r);
      const Real s1 = Eigen::BDCSVD<Matrix>(psi).singularValues()(0);
      est.mu_effective[r] = cfg.mu * s1 * (cfg.nu > 0 ? cfg.nu : 1.0);
    }
  }
  std::vector<Real> threshold(r_count);
  for (int r = 0; r < r_count; ++r)
    threshold[r] = cfg.nu > 0 ? est.mu_effective[r] / cfg.nu : est.mu_effective[r];

  auto objective = [&] {
    return objective_value(caches, local, phi, fields, meas, cfg.nu, est.mu_effective);
  };

  est.objective_trace.push_back(objective());
  auto fail = [&](const std::string& why) {
    est.fields_hat = fields;
    est.spectra_hat = phi;
    est.local = local;
    est.tensor_hat = assemble_tensor(fields, phi);
    throw SolverFailure("solve: " + why, est);
  };

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    local = update_theta_all(caches, phi, fields, grid, cfg.nu, cfg.theta_ridge,
                             std::move(local), &est.skipped_cells, &est.warnings);
    Matrix phi_raw;
    try {
      phi_raw = update_phi(caches, local);
    } catch (const Error& e) {
      fail(e.what());
    }
    // Row-sum-K normalization; the inverse scale folds into the matching
    // theta block and field so the reconstruction term is unchanged.
    for (int r = 0; r < r_count; ++r) {
      const Real sum = phi_raw.row(r).sum();
      if (!(sum > 0)) fail("spectrum row " + std::to_string(r) + " collapsed to zero");
      const Real c = k_bands / sum;
      phi.row(r) = phi_raw.row(r) * c;
      local.theta.middleRows(7 * r, 7) /= c;
      fields[r] /= c;
    }
    if (cfg.nu > 0)
      fields = update_fields(local, grid, threshold, cfg.svt, &fields);

    const Real f = objective();
    const Real f_prev = est.objective_trace.back();
    est.objective_trace.push_back(f);
    const Real rel = std::abs(f - f_prev) / std::max<Real>(std::abs(f_prev), 1e-30);
    if (progress)
      (*progress) << "iter " << outer << " objective " << f << " rel_change " << rel << "\n";
    if (rel < cfg.outer_tol) {
      est.converged = true;
      break;
    }
  }

  if (cfg.nu == 0)
    fields = update_fields(local, grid, threshold, cfg.svt, &fields);

  est.fields_hat = std::move(fields);
  est.spectra_hat = std::move(phi);
  est.local = std::move(local);
  est.tensor_hat = assemble_tensor(est.fields_hat, est.spectra_hat);
  return est;
}

}  // namespace specmap
