#pragma once

#include "specmap/types.hpp"

#include <variant>

namespace specmap {

/// Second-order local polynomial design vector at offset z - c:
/// [1, dx, dy, dx^2, dy*dx, dx*dy, dy^2] (column-major vec of the outer
/// product of the offset with itself).
inline Eigen::Matrix<Real, 7, 1> design_vector(const Vec2& z, const Vec2& c) {
  const Real dx = z.x() - c.x(), dy = z.y() - c.y();
  Eigen::Matrix<Real, 7, 1> x;
  x << 1.0, dx, dy, dx * dx, dy * dx, dx * dy, dy * dy;
  return x;
}

/// Epanechnikov kernel kappa(u) = max(0, 3/4 (1 - |u|^2)).
inline Real epanechnikov(Real dist, Real bandwidth) {
  const Real u = dist / bandwidth;
  return std::max(0.0, 0.75 * (1.0 - u * u));
}

struct KernelConfig {
  struct Fixed { Real bandwidth; };
  struct MinNeighbors { int m0; };
  std::variant<Fixed, MinNeighbors> bandwidth_rule = MinNeighbors{14};

  static KernelConfig fixed(Real b) { return {Fixed{b}}; }
  static KernelConfig min_neighbors(int m0) { return {MinNeighbors{m0}}; }

  int required_neighbors() const {
    if (const auto* mn = std::get_if<MinNeighbors>(&bandwidth_rule)) return mn->m0;
    return 7;  // the local model has seven coefficients
  }
  void validate() const {
    if (const auto* f = std::get_if<Fixed>(&bandwidth_rule)) {
      if (!(f->bandwidth > 0)) throw ConfigError("KernelConfig: fixed bandwidth must be positive");
    } else if (std::get<MinNeighbors>(bandwidth_rule).m0 < 7) {
      throw ConfigError("KernelConfig: min_neighbors must be at least 7");
    }
  }
};

/// Strictly positive kernel weights of one cell's sensor window.
struct CellWindow {
  int cell_index = 0;            // flat index i * n2 + j
  Vec2 center;
  Real bandwidth = 0;
  std::vector<int> sensor;       // indices into the sensor list
  Vector weight;                 // kappa values, aligned with `sensor`
};

/// Windows for each requested cell. Under the min-neighbors rule the
/// per-cell bandwidth is the smallest sensor distance that leaves at least
/// m0 strictly positive weights inside the window.
std::vector<CellWindow> kernel_weights(const std::vector<int>& cells, const GridSpec& grid,
                                       const std::vector<Vec2>& sensors, const KernelConfig& cfg);

}  // namespace specmap
