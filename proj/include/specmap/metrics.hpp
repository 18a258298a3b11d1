#pragma once

#include "specmap/scene.hpp"
#include "specmap/solver.hpp"
#include "specmap/types.hpp"

namespace specmap {

/// ||est - truth||_F^2 / ||truth||_F^2
Real nmse(const Matrix& est, const Matrix& truth);
/// Same ratio aggregated over slices; serves both tensors and field stacks.
Real nmse(const std::vector<Matrix>& est, const std::vector<Matrix>& truth);

/// Reorders the estimate's sources by the permutation minimizing the total
/// spectrum NMSE (exhaustive, R <= 6). The reconstructed tensor is
/// unaffected up to floating point.
struct Alignment {
  Estimate estimate;
  std::vector<int> permutation;  // estimate source r came from input source permutation[r]
};
Alignment align_sources(const Estimate& est, const GroundTruth& truth);

}  // namespace specmap
