#pragma once

#include "specmap/kernel.hpp"
#include "specmap/numerics.hpp"
#include "specmap/scene.hpp"
#include "specmap/types.hpp"

#include <iosfwd>
#include <optional>

namespace specmap {

/// Cells on which local models are fit.
struct InterpSet {
  enum class Kind { Full, Stride, Explicit };
  Kind kind = Kind::Stride;
  int stride = 2;
  std::vector<int> cells;  // flat indices i * n2 + j, Explicit only

  static InterpSet full() { return {Kind::Full, 0, {}}; }
  static InterpSet strided(int s) { return {Kind::Stride, s, {}}; }
  static InterpSet explicit_cells(std::vector<int> c) { return {Kind::Explicit, 0, std::move(c)}; }

  std::vector<int> materialize(const GridSpec& grid) const;
};

struct SolverConfig {
  Real nu = 1e-4;            // coupling weight between local fits and the field matrices
  Real mu = 0.0;             // nuclear-norm coefficient
  /// When set, the nuclear coefficient of source r becomes
  /// mu * nu * sigma_1(initial field observations), i.e. the field-update
  /// soft threshold is mu relative to the leading singular value.
  bool mu_spectral = false;
  InterpSet interp_set;
  int max_outer = 50;
  Real outer_tol = 1e-6;
  SvtConfig svt;
  Real theta_ridge = 0.0;    // 0 -> 1e-10 trace scale, applied only on failure

  void validate() const {
    if (nu < 0) throw ConfigError("SolverConfig: nu must be nonnegative");
    if (mu < 0) throw ConfigError("SolverConfig: mu must be nonnegative");
    if (max_outer < 1) throw ConfigError("SolverConfig: max_outer must be positive");
    if (!(outer_tol > 0)) throw ConfigError("SolverConfig: outer_tol must be positive");
    svt.validate();
  }
};

/// Per-cell stacked local polynomial coefficients, one 7R column per cell.
/// Entry 7r of a column is the constant term (the field estimate) of source r.
struct LocalModel {
  std::vector<int> cells;
  Matrix theta;        // 7R x |cells|
  int n_sources = 0;

  Real alpha(int cell_pos, int r) const { return theta(7 * r, cell_pos); }
  /// Column-wise 7 x R view of one cell's coefficients.
  Eigen::Map<const Matrix> cell_matrix(int cell_pos) const {
    return {theta.col(cell_pos).data(), 7, n_sources};
  }
};

struct Estimate {
  std::vector<Matrix> fields_hat;
  Matrix spectra_hat;              // R x K, rows sum to K
  Tensor3 tensor_hat;              // always sum_r fields_hat[r] (outer) spectra row r
  std::vector<Real> objective_trace;
  bool converged = false;
  LocalModel local;
  std::vector<Real> mu_effective;  // per-source nuclear coefficient actually used
  int skipped_cells = 0;
  std::vector<std::string> warnings;
};

struct SolverFailure : Error {
  SolverFailure(const std::string& what, Estimate last)
      : Error(what), partial(std::move(last)) {}
  Estimate partial;
};

struct InitOptions {
  std::optional<Matrix> phi0;
  std::optional<std::vector<Matrix>> s0;
  std::uint64_t seed = 0;  // drives the symmetry-breaking perturbation for R >= 2
};

/// Measurement moments of one cell window, fixed across outer iterations.
struct CellCache {
  CellWindow window;
  Eigen::Matrix<Real, 7, Eigen::Dynamic> design;           // x_m columns
  std::vector<Eigen::Matrix<Real, 7, 7>> band_moment;      // K of sum kappa*psi x x^T
  Matrix band_rhs;                                         // 7 x K: sum kappa*psi gamma x
  Vector band_sq;                                          // K: sum kappa*psi gamma^2
};

std::vector<CellCache> build_cell_caches(const std::vector<CellWindow>& windows,
                                         const MeasurementSet& meas);

/// Closed-form update of one cell's stacked coefficients given the spectra
/// and the current field values at that cell. Returns false when the normal
/// matrix stays indefinite after the ridge fallback.
bool update_theta(const CellCache& cache, const Matrix& phi, const Vector& s_at_cell,
                  Real nu, Real theta_ridge, Eigen::Ref<Vector> theta_out);

/// Nonnegative spectra minimizing the stacked weighted residual at fixed
/// local models; band-separable, solved by principal-pivoting NNLS per band.
Matrix update_phi(const std::vector<CellCache>& caches, const LocalModel& local);

/// Per-source nuclear-norm-regularized completion of the constant terms over
/// the interpolation set; `threshold[r]` is the soft-threshold level.
std::vector<Matrix> update_fields(const LocalModel& local, const GridSpec& grid,
                                  const std::vector<Real>& threshold, const SvtConfig& svt,
                                  const std::vector<Matrix>* warm);

/// Three-term objective: stacked weighted residual + nu * coupling +
/// sum_r mu_eff[r] ||S_r||_*.
Real objective_value(const std::vector<CellCache>& caches, const LocalModel& local,
                     const Matrix& phi, const std::vector<Matrix>& fields,
                     const MeasurementSet& meas, Real nu, const std::vector<Real>& mu_eff);

/// Alternating minimization: theta regression, spectrum NNLS (rows rescaled
/// to sum K with the inverse scale folded into theta and the fields), then
/// soft-thresholded field completion, until the relative objective change
/// drops below outer_tol. With nu = 0 the field step runs once after the
/// loop since nothing feeds back.
Estimate solve(const MeasurementSet& meas, const GridSpec& grid, const KernelConfig& kcfg,
               const SolverConfig& cfg, int n_sources, const InitOptions& init = {},
               std::ostream* progress = nullptr);

namespace detail {
/// Assembled normal matrix and right-hand side of one cell's theta update
/// (before the nu terms); exposed for verification.
std::pair<Matrix, Vector> theta_normal_system(const CellCache& cache, const Matrix& phi);
}  // namespace detail

}  // namespace specmap
