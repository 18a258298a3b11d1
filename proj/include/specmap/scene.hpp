#pragma once

#include "specmap/types.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

namespace specmap {

using Rng = std::mt19937_64;

enum class PropagationModel { Friis, ExpDecay, LogDistance };

/// How the shadowing draw enters the linear-scale field.
///   Log10Additive : zeta = 10^x - 1 added to the path gain (a zero draw adds
///                   nothing); x is the zero-mean GP in log10 units.
///   DbFactor      : path gain multiplied by 10^(x/10), x in dB.
///   LinearAdditive: the GP draw itself added in linear units.
enum class ShadowMode { Log10Additive, DbFactor, LinearAdditive };

struct SceneConfig {
  Real area_side_m = 50.0;          // L
  int n1 = 31, n2 = 31;             // grid resolution
  int n_sources = 2;                // R
  int n_bands = 20;                 // K
  Real tx_power_w = 1.0;            // P_r, shared by all sources
  Real friis_c0 = 2.0;              // C0
  Real source_height_m = 1.0;       // h, keeps the path gain finite at d = 0
  Real shadow_sigma = 0.0;          // sigma_s (log10 std, or dB in DbFactor mode)
  Real shadow_corr_dist_m = 30.0;   // d_c
  Real sigma_eta = 0.0;             // frequency-selective fading std
  Real snr_db = 20.0;               // sets sigma_eps; +inf means noiseless
  std::uint64_t rng_seed = 0;

  PropagationModel prop_model = PropagationModel::Friis;
  Real prop_alpha = 1.0;            // ExpDecay: g = alpha*exp(-d^beta); LogDistance: g = alpha - beta*log10(d)
  Real prop_beta = 1.5;
  ShadowMode shadow_mode = ShadowMode::Log10Additive;
  bool literal_sinc_arg = false;    // sinc^2(k - f/b) instead of sinc^2((k - f)/b)
  std::vector<Vec2> source_locations;  // drawn uniformly when empty
  Matrix fixed_spectra;             // overrides the random spectra when non-empty

  GridSpec grid() const { return {n1, n2, area_side_m}; }
  Real sigma_eps() const {
    if (std::isinf(snr_db)) return 0.0;
    return std::sqrt(std::pow(10.0, -snr_db / 10.0));
  }
  void validate() const;
};

/// Per-band sensor sampling plan.
struct SamplingPlan {
  enum class BandScheme { Full, UniformRandom, WeightedTwoPopulation };
  int m = 0;                  // number of sensors
  bool on_grid = false;       // snap sensors to the nearest cell center
  BandScheme scheme = BandScheme::Full;
  int k_prime = 0;            // bands per sensor for the non-full schemes
  Real weight_c = 1.0;        // non-homogeneity weight

  void validate(int n_bands) const;
};

struct GroundTruth {
  std::vector<Matrix> fields;       // R propagation fields on the grid
  Matrix spectra;                   // R x K, each row sums to K
  Tensor3 tensor;                   // K slices of n1 x n2
  std::vector<Vec2> source_locations;

  // Exact field values at the extra (typically sensor) locations used when
  // the shadowing process was realized; column p holds all R sources at
  // extra point p.
  std::vector<Vec2> extra_points;
  Matrix field_at_extra;            // R x P

  int n_sources() const { return static_cast<int>(fields.size()); }
};

struct MeasurementSet {
  std::vector<Vec2> locations;  // M sensor positions
  BoolArray band_mask;          // M x K
  Matrix readings;              // M x K, zero where unobserved
  bool on_grid = false;

  int m() const { return static_cast<int>(locations.size()); }
  int k() const { return static_cast<int>(band_mask.cols()); }
};

/// Zero-mean Gaussian process with covariance sigma^2 exp(-|zi-zj|/dc),
/// realized exactly by a dense Cholesky factorization (at most 4000 points).
Vector sample_gp(const std::vector<Vec2>& points, Real sigma, Real corr_dist, Rng& rng);

/// Deterministic path gain of one source as a function of position.
Real path_gain(const SceneConfig& cfg, const Vec2& source, const Vec2& z);

/// Squared-sinc mixture spectrum rows, one per source, each normalized to
/// sum to the number of bands.
Matrix generate_spectrum(const SceneConfig& cfg, Rng& rng);
/// Deterministic variant used by the random generator and by tests.
Vector spectrum_from_params(const std::array<Real, 2>& amp, const std::array<Real, 2>& center,
                            const std::array<Real, 2>& width, int n_bands, bool literal_arg);

Tensor3 assemble_tensor(const std::vector<Matrix>& fields, const Matrix& spectra);

/// Field of one source on the grid plus exact values at `extra` points;
/// consumes the rng for the shadowing realization only.
struct FieldSample {
  Matrix grid_values;
  Vector extra_values;
};
FieldSample generate_field(const SceneConfig& cfg, const Vec2& source,
                           const std::vector<Vec2>& extra, Rng& rng);

/// Draws sensor locations for a plan (uniform over the area, optionally
/// snapped to cell centers).
std::vector<Vec2> draw_sensor_locations(const SceneConfig& cfg, const SamplingPlan& plan, Rng& rng);

GroundTruth generate_ground_truth(const SceneConfig& cfg, const std::vector<Vec2>& extra, Rng& rng);

/// Noisy multiband readings at the ground truth's extra points.
MeasurementSet sample_measurements(const GroundTruth& gt, const SceneConfig& cfg,
                                   const SamplingPlan& plan, Rng& rng);

/// Full pipeline: sources, spectra, sensor layout, shadowing realization over
/// grid and sensors jointly, then masked noisy readings.
struct Scene {
  GroundTruth truth;
  MeasurementSet measurements;
};
Scene generate_scene(const SceneConfig& cfg, const SamplingPlan& plan);

}  // namespace specmap
