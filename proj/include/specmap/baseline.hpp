#pragma once

#include "specmap/kernel.hpp"
#include "specmap/scene.hpp"
#include "specmap/types.hpp"

namespace specmap {

/// Frequency-by-frequency local polynomial fits: one second-order weighted
/// regression per (cell, band) on that band's readings alone.
struct BandEstimate {
  std::vector<Matrix> alpha;   // K maps of per-band constant terms
  Matrix alpha_avg;            // arithmetic mean over the valid bands per cell
  BoolArray valid;             // (n1*n2) x K, false where a fit was under-determined

  Tensor3 as_tensor() const { return {alpha.begin(), alpha.end()}; }
};

BandEstimate lpr_per_band(const MeasurementSet& meas, const GridSpec& grid,
                          const KernelConfig& kcfg);

}  // namespace specmap
