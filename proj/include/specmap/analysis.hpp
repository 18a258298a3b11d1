#pragma once

#include "specmap/kernel.hpp"
#include "specmap/scene.hpp"
#include "specmap/types.hpp"

#include <iosfwd>

namespace specmap {

/// Kernel-weighted moment matrices of a sensor layout around one cell.
/// a1 uses the kernel weights, a2 the squared weights; the constant
/// c = [a1^-1 a2 a1^-1]_(1,1) converts per-measurement noise variance into
/// the variance of the local constant-term estimate.
struct TopologyMatrices {
  Eigen::Matrix<Real, 7, 7> a1;
  Eigen::Matrix<Real, 7, 7> a2;
  Real c_const = 0;
};

/// Fixed sensor layout, cell and bandwidth shared by predictor and
/// Monte Carlo runs.
struct Topology {
  std::vector<Vec2> sensors;
  Vec2 cell;
  Real bandwidth = 0;

  Vector weights() const {
    Vector w(sensors.size());
    for (size_t m = 0; m < sensors.size(); ++m)
      w[m] = epanechnikov((sensors[m] - cell).norm(), bandwidth);
    return w;
  }
};

TopologyMatrices topology_constant(const Topology& topo);

/// Spectrum-dependent coefficients of the integrated single-source error
/// variance: (fading coefficient, noise coefficient) =
/// (sum phi^4 / (sum phi^2)^2, 1 / sum phi^2), with
/// 1/K <= first <= 1 and 1/K^2 <= second <= 1/K.
std::pair<Real, Real> spectrum_coefficients(const Vector& phi);

/// Error variance of the integrated full-spectrum estimate at one cell.
Real predict_variance_integrated(const Vector& phi, Real sig_eta, Real sig_eps,
                                 const TopologyMatrices& topo);

/// Mean per-band error variance of the frequency-by-frequency estimate,
/// on the field scale (each band divided by its own spectrum value);
/// diverges as any phi_k -> 0.
Real predict_variance_per_band(const Vector& phi, Real sig_eta, Real sig_eps,
                               const TopologyMatrices& topo);

struct VarianceGap {
  Real gap = 0;
  Real coeff_eta = 0;  // in [0, (K-1)/K]
  Real coeff_eps = 0;  // >= (K-1)/K
};
/// Difference between the per-band and the integrated variances.
VarianceGap variance_gap(const Vector& phi, Real sig_eta, Real sig_eps,
                         const TopologyMatrices& topo);

/// Integrated-estimate variance when every sensor measures k_prime bands of
/// a flat spectrum: (sig_eta^2 + sig_eps^2) C / k_prime.
Real predict_variance_band_subset(int k_prime, Real sig_eta, Real sig_eps,
                                  const TopologyMatrices& topo);

struct TwoSourcePrediction {
  Real variance = 0;
  Real coeff_eta = 0;
  Real coeff_eps = 0;
};
/// Two equal-power sources sharing a fraction `overlap` of the K bands;
/// singular at overlap = 1 where the sources cannot be told apart.
TwoSourcePrediction predict_variance_two_source(Real overlap, int n_bands, Real sig_eta,
                                                Real sig_eps, const TopologyMatrices& topo);

/// Spectrum layout of the two-source analysis: rows in {0,1}, source 1 on
/// the first k1 bands, source 2 on the last k1, k2 = overlap * K shared.
Matrix two_source_spectrum(Real overlap, int n_bands);

enum class EstimatorKind { IntegratedNuZero, PerBand, TwoSource };

struct VarianceScenario {
  Topology topology;
  Matrix phi;          // R x K spectrum the estimator conditions on
  BoolArray band_mask; // M x K observation pattern, fixed across trials
  Real sigma_eta = 0;
  Real sigma_eps = 0;
  EstimatorKind estimator = EstimatorKind::IntegratedNuZero;

  static VarianceScenario full_spectrum(Topology t, Vector phi_row, Real se, Real sn,
                                        EstimatorKind kind = EstimatorKind::IntegratedNuZero);
};

struct MonteCarloResult {
  Real variance = 0;    // the scenario's designated statistic
  Real std_error = 0;   // delete-one jackknife
  int trials = 0;
};

/// Empirical error variance of the scenario's estimator at the designated
/// cell over fresh fading/noise draws (field bias cancels since the
/// estimator is linear in the readings). For the per-band estimator the
/// statistic is the mean of the per-band variances.
MonteCarloResult monte_carlo_variance(const VarianceScenario& scenario, int n_trials, Rng& rng);

struct GapResult {
  Real per_band = 0;    // empirical mean per-band variance
  Real integrated = 0;  // empirical integrated variance
  Real gap = 0;
  Real gap_std_error = 0;  // jackknife of the paired difference
  int trials = 0;
};

/// Both estimators evaluated on shared noise draws over a full-spectrum
/// single-source scenario; the paired difference estimates the variance
/// reduction directly.
GapResult monte_carlo_gap(const Topology& topo, const Vector& phi, Real sigma_eta,
                          Real sigma_eps, int n_trials, Rng& rng);

struct ValidationRow {
  std::string name;
  Real predicted = 0;
  Real empirical = 0;
  Real std_error = 0;
  bool pass = false;
};

/// Closed form vs Monte Carlo for the standard scenarios; `rel_tol` is the
/// allowed relative deviation on top of the 3-sigma jackknife band.
std::vector<ValidationRow> validation_report(int n_trials, std::uint64_t seed, Real rel_tol = 0.05);
void write_validation_report(std::ostream& os, const std::vector<ValidationRow>& rows);

}  // namespace specmap
