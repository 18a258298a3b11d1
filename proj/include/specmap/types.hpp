#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace specmap {

using Real = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense 3-array stored as frequency slices; slice k is an n1 x n2 map.
using Tensor3 = std::vector<Matrix>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

/// Thrown when a linear system stays ill-conditioned after regularization.
struct ConditioningError : Error {
  ConditioningError(const std::string& what, Real min_eig)
      : Error(what + " (smallest eigenvalue " + std::to_string(min_eig) + ")"),
        min_eigenvalue(min_eig) {}
  Real min_eigenvalue;
};

/// Thrown when a least-squares design is rank deficient beyond repair.
struct DegenerateDesign : Error {
  DegenerateDesign(const std::string& what, std::vector<int> cols)
      : Error(what), columns(std::move(cols)) {}
  std::vector<int> columns;
};

/// Uniform rectangular grid over the square area [0, area_side]^2.
struct GridSpec {
  int n1 = 0;
  int n2 = 0;
  Real area_side = 0;

  Vec2 cell_center(int i, int j) const {
    return {(i + 0.5) * area_side / n1, (j + 0.5) * area_side / n2};
  }
  int cell_count() const { return n1 * n2; }

  /// Index of the grid cell whose center is nearest to z.
  std::pair<int, int> nearest_cell(const Vec2& z) const {
    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    int i = clampi(static_cast<int>(z.x() / area_side * n1), 0, n1 - 1);
    int j = clampi(static_cast<int>(z.y() / area_side * n2), 0, n2 - 1);
    return {i, j};
  }
};

inline Real frobenius_sq(const Tensor3& t) {
  Real s = 0;
  for (const auto& slice : t) s += slice.squaredNorm();
  return s;
}

}  // namespace specmap
