#include "specmap/scene.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace specmap {

void SceneConfig::validate() const {
  if (area_side_m <= 0) throw ConfigError("SceneConfig: area_side_m must be positive");
  if (n1 < 1 || n2 < 1) throw ConfigError("SceneConfig: grid resolution must be positive");
  if (n_sources < 1) throw ConfigError("SceneConfig: n_sources must be >= 1");
  if (n_bands < 1) throw ConfigError("SceneConfig: n_bands must be >= 1");
  if (tx_power_w <= 0) throw ConfigError("SceneConfig: tx_power_w must be positive");
  if (friis_c0 <= 0) throw ConfigError("SceneConfig: friis_c0 must be positive");
  if (source_height_m < 0) throw ConfigError("SceneConfig: source_height_m must be nonnegative");
  if (shadow_sigma < 0) throw ConfigError("SceneConfig: shadow_sigma must be nonnegative");
  if (shadow_corr_dist_m <= 0) throw ConfigError("SceneConfig: shadow_corr_dist_m must be positive");
  if (sigma_eta < 0) throw ConfigError("SceneConfig: sigma_eta must be nonnegative");
  if (!source_locations.empty() &&
      static_cast<int>(source_locations.size()) != n_sources)
    throw ConfigError("SceneConfig: source_locations must be empty or have n_sources entries");
  if (fixed_spectra.size() > 0 &&
      (fixed_spectra.rows() != n_sources || fixed_spectra.cols() != n_bands))
    throw ConfigError("SceneConfig: fixed_spectra must be n_sources x n_bands");
}

void SamplingPlan::validate(int n_bands) const {
  if (m < 1) throw ConfigError("SamplingPlan: m must be >= 1");
  if (scheme != BandScheme::Full) {
    if (k_prime < 1 || k_prime > n_bands)
      throw ConfigError("SamplingPlan: k_prime must lie in [1, n_bands]");
  }
  if (weight_c <= 0) throw ConfigError("SamplingPlan: weight_c must be positive");
}

Vector sample_gp(const std::vector<Vec2>& points, Real sigma, Real corr_dist, Rng& rng) {
  const int n = static_cast<int>(points.size());
  if (n > 4000)
    throw ConfigError("sample_gp: exact realization limited to 4000 points");
  std::normal_distribution<Real> normal(0.0, 1.0);
  Vector white(n);
  for (int i = 0; i < n; ++i) white[i] = normal(rng);
  if (sigma == 0 || n == 0) return Vector::Zero(n);

  Matrix cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      Real c = sigma * sigma * std::exp(-(points[i] - points[j]).norm() / corr_dist);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-10 * sigma * sigma;
    llt.compute(cov);
    if (llt.info() != Eigen::Success)
      throw Error("sample_gp: covariance factorization failed after jitter");
  }
  return llt.matrixL() * white;
}

Real path_gain(const SceneConfig& cfg, const Vec2& source, const Vec2& z) {
  const Real h = cfg.source_height_m;
  const Real d_sq = (z - source).squaredNorm() + h * h;
  switch (cfg.prop_model) {
    case PropagationModel::Friis:
      return cfg.tx_power_w * cfg.friis_c0 * cfg.friis_c0 / d_sq;
    case PropagationModel::ExpDecay:
      return cfg.tx_power_w * cfg.prop_alpha * std::exp(-std::pow(std::sqrt(d_sq), cfg.prop_beta));
    case PropagationModel::LogDistance:
      return cfg.tx_power_w * (cfg.prop_alpha - cfg.prop_beta * std::log10(std::sqrt(d_sq)));
  }
  return 0;
}

namespace {

Real apply_shadow(const SceneConfig& cfg, Real gain, Real draw) {
  switch (cfg.shadow_mode) {
    case ShadowMode::Log10Additive:
      return gain + (std::pow(10.0, draw) - 1.0);
    case ShadowMode::DbFactor:
      return gain * std::pow(10.0, draw / 10.0);
    case ShadowMode::LinearAdditive:
      return gain + draw;
  }
  return gain;
}

}  // namespace

Vector spectrum_from_params(const std::array<Real, 2>& amp, const std::array<Real, 2>& center,
                            const std::array<Real, 2>& width, int n_bands, bool literal_arg) {
  auto sinc = [](Real x) {
    if (x == 0) return 1.0;
    Real px = M_PI * x;
    return std::sin(px) / px;
  };
  Vector row(n_bands);
  for (int k = 1; k <= n_bands; ++k) {
    Real v = 0;
    for (int i = 0; i < 2; ++i) {
      Real arg = literal_arg ? (k - center[i] / width[i]) : ((k - center[i]) / width[i]);
      Real s = sinc(arg);
      v += amp[i] * s * s;
    }
    row[k - 1] = v;
  }
  row *= n_bands / row.sum();
  return row;
}

Matrix generate_spectrum(const SceneConfig& cfg, Rng& rng) {
  if (cfg.n_bands < 2) throw ConfigError("generate_spectrum: needs at least two bands");
  std::uniform_real_distribution<Real> amp_dist(0.5, 2.0);
  std::uniform_int_distribution<int> center_dist(1, cfg.n_bands);
  std::uniform_real_distribution<Real> width_dist(2.0, 4.0);
  Matrix spectra(cfg.n_sources, cfg.n_bands);
  for (int r = 0; r < cfg.n_sources; ++r) {
    std::array<Real, 2> a{amp_dist(rng), amp_dist(rng)};
    std::array<Real, 2> f{Real(center_dist(rng)), Real(center_dist(rng))};
    std::array<Real, 2> b{width_dist(rng), width_dist(rng)};
    spectra.row(r) = spectrum_from_params(a, f, b, cfg.n_bands, cfg.literal_sinc_arg).transpose();
  }
  return spectra;
}

Tensor3 assemble_tensor(const std::vector<Matrix>& fields, const Matrix& spectra) {
  const int r_count = static_cast<int>(fields.size());
  if (spectra.rows() != r_count)
    throw InvalidInput("assemble_tensor: spectra rows must match field count");
  if (r_count == 0) throw InvalidInput("assemble_tensor: no fields");
  const Eigen::Index n1 = fields[0].rows(), n2 = fields[0].cols();
  for (const auto& f : fields)
    if (f.rows() != n1 || f.cols() != n2)
      throw InvalidInput("assemble_tensor: field shapes differ");

  Tensor3 tensor(spectra.cols());
  for (Eigen::Index k = 0; k < spectra.cols(); ++k) {
    Matrix slice = Matrix::Zero(n1, n2);
    for (int r = 0; r < r_count; ++r) slice += fields[r] * spectra(r, k);
    tensor[k] = std::move(slice);
  }
  return tensor;
}

FieldSample generate_field(const SceneConfig& cfg, const Vec2& source,
                           const std::vector<Vec2>& extra, Rng& rng) {
  const GridSpec grid = cfg.grid();
  // Coincident points (snapped sensors sitting on cell centers) must share
  // one shadowing value, so the process is realized over unique locations.
  std::vector<Vec2> unique_pts;
  std::map<std::pair<Real, Real>, int> index_of;
  std::vector<int> slot;
  auto add_point = [&](const Vec2& z) {
    auto key = std::make_pair(z.x(), z.y());
    auto [it, inserted] = index_of.try_emplace(key, static_cast<int>(unique_pts.size()));
    if (inserted) unique_pts.push_back(z);
    slot.push_back(it->second);
  };
  for (int i = 0; i < grid.n1; ++i)
    for (int j = 0; j < grid.n2; ++j) add_point(grid.cell_center(i, j));
  for (const auto& z : extra) add_point(z);

  Vector shadow = sample_gp(unique_pts, cfg.shadow_sigma, cfg.shadow_corr_dist_m, rng);

  FieldSample out;
  out.grid_values.resize(grid.n1, grid.n2);
  int p = 0;
  for (int i = 0; i < grid.n1; ++i)
    for (int j = 0; j < grid.n2; ++j, ++p)
      out.grid_values(i, j) =
          apply_shadow(cfg, path_gain(cfg, source, grid.cell_center(i, j)), shadow[slot[p]]);
  out.extra_values.resize(extra.size());
  for (size_t e = 0; e < extra.size(); ++e, ++p)
    out.extra_values[e] = apply_shadow(cfg, path_gain(cfg, source, extra[e]), shadow[slot[p]]);
  return out;
}

std::vector<Vec2> draw_sensor_locations(const SceneConfig& cfg, const SamplingPlan& plan, Rng& rng) {
  plan.validate(cfg.n_bands);
  std::uniform_real_distribution<Real> coord(0.0, cfg.area_side_m);
  std::vector<Vec2> locs(plan.m);
  const GridSpec grid = cfg.grid();
  for (auto& z : locs) {
    z = {coord(rng), coord(rng)};
    if (plan.on_grid) {
      auto [i, j] = grid.nearest_cell(z);
      z = grid.cell_center(i, j);
    }
  }
  return locs;
}

namespace {

std::vector<Vec2> draw_source_locations(const SceneConfig& cfg, Rng& rng) {
  if (!cfg.source_locations.empty()) return cfg.source_locations;
  // Uniform over the central region, rejecting layouts with nearly
  // coincident sources so that separation studies stay well posed.
  const Real lo = 0.1 * cfg.area_side_m, hi = 0.9 * cfg.area_side_m;
  const Real min_sep = 0.25 * cfg.area_side_m;
  std::uniform_real_distribution<Real> coord(lo, hi);
  std::vector<Vec2> out;
  for (int r = 0; r < cfg.n_sources; ++r) {
    Vec2 z;
    for (int attempt = 0; attempt < 200; ++attempt) {
      z = {coord(rng), coord(rng)};
      bool ok = true;
      for (const auto& s : out)
        if ((z - s).norm() < min_sep) ok = false;
      if (ok) break;
    }
    out.push_back(z);
  }
  return out;
}

/// Weighted sampling without replacement (Efraimidis-Spirakis keys).
std::vector<int> weighted_subset(const Vector& weights, int count, Rng& rng) {
  std::uniform_real_distribution<Real> unif(0.0, 1.0);
  std::vector<std::pair<Real, int>> keys(weights.size());
  for (int k = 0; k < weights.size(); ++k) {
    Real u = unif(rng);
    keys[k] = {std::pow(u, 1.0 / weights[k]), k};
  }
  std::sort(keys.begin(), keys.end(), std::greater<>());
  std::vector<int> chosen(count);
  for (int k = 0; k < count; ++k) chosen[k] = keys[k].second;
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

BoolArray draw_band_masks(const SceneConfig& cfg, const SamplingPlan& plan, Rng& rng) {
  const int m = plan.m, k = cfg.n_bands;
  BoolArray mask(m, k);
  switch (plan.scheme) {
    case SamplingPlan::BandScheme::Full:
      mask.setConstant(true);
      break;
    case SamplingPlan::BandScheme::UniformRandom: {
      mask.setConstant(false);
      for (int s = 0; s < m; ++s) {
        Vector w = Vector::Ones(k);
        for (int idx : weighted_subset(w, plan.k_prime, rng)) mask(s, idx) = true;
      }
      break;
    }
    case SamplingPlan::BandScheme::WeightedTwoPopulation: {
      mask.setConstant(false);
      const int half_bands = k / 2;
      for (int s = 0; s < m; ++s) {
        const bool first_pop = s < m / 2;
        Vector w(k);
        for (int b = 0; b < k; ++b) {
          bool low_band = b < half_bands;
          w[b] = (low_band == first_pop) ? 1.0 : plan.weight_c;
        }
        for (int idx : weighted_subset(w, plan.k_prime, rng)) mask(s, idx) = true;
      }
      break;
    }
  }
  return mask;
}

}  // namespace

GroundTruth generate_ground_truth(const SceneConfig& cfg, const std::vector<Vec2>& extra, Rng& rng) {
  cfg.validate();
  GroundTruth gt;
  gt.source_locations = draw_source_locations(cfg, rng);
  gt.spectra = cfg.fixed_spectra.size() > 0 ? cfg.fixed_spectra : generate_spectrum(cfg, rng);
  gt.extra_points = extra;
  gt.field_at_extra.resize(cfg.n_sources, static_cast<Eigen::Index>(extra.size()));
  gt.fields.reserve(cfg.n_sources);
  for (int r = 0; r < cfg.n_sources; ++r) {
    FieldSample fs = generate_field(cfg, gt.source_locations[r], extra, rng);
    gt.fields.push_back(std::move(fs.grid_values));
    gt.field_at_extra.row(r) = fs.extra_values.transpose();
  }
  gt.tensor = assemble_tensor(gt.fields, gt.spectra);
  return gt;
}

MeasurementSet sample_measurements(const GroundTruth& gt, const SceneConfig& cfg,
                                   const SamplingPlan& plan, Rng& rng) {
  plan.validate(cfg.n_bands);
  if (static_cast<int>(gt.extra_points.size()) != plan.m)
    throw InvalidInput("sample_measurements: ground truth was realized for a different sensor count");

  MeasurementSet ms;
  ms.locations = gt.extra_points;
  ms.on_grid = plan.on_grid;
  ms.band_mask = draw_band_masks(cfg, plan, rng);
  ms.readings = Matrix::Zero(plan.m, cfg.n_bands);

  const Real sig_eps = cfg.sigma_eps();
  std::normal_distribution<Real> normal(0.0, 1.0);
  for (int m = 0; m < plan.m; ++m) {
    for (int k = 0; k < cfg.n_bands; ++k) {
      if (!ms.band_mask(m, k)) continue;
      Real acc = 0;
      for (int r = 0; r < cfg.n_sources; ++r) {
        Real eta = cfg.sigma_eta > 0 ? cfg.sigma_eta * normal(rng) : 0.0;
        acc += (gt.field_at_extra(r, m) + eta) * gt.spectra(r, k);
      }
      if (sig_eps > 0) acc += sig_eps * normal(rng);
      ms.readings(m, k) = acc;
    }
  }
  return ms;
}

Scene generate_scene(const SceneConfig& cfg, const SamplingPlan& plan) {
  cfg.validate();
  plan.validate(cfg.n_bands);
  Rng rng(cfg.rng_seed);
  // rng consumption order is fixed: sources, sensor locations, spectra,
  // one shadowing realization per source, band masks, measurement noise.
  Scene scene;
  std::vector<Vec2> sources = draw_source_locations(cfg, rng);
  SceneConfig pinned = cfg;
  pinned.source_locations = sources;
  std::vector<Vec2> sensors = draw_sensor_locations(pinned, plan, rng);
  scene.truth = generate_ground_truth(pinned, sensors, rng);
  scene.measurements = sample_measurements(scene.truth, pinned, plan, rng);
  return scene;
}

}  // namespace specmap
