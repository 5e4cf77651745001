#pragma once

#include <cstddef>
#include <vector>

namespace cglab {

/// Uniform grid of `n_nodes` points spanning [min, max] inclusive.
struct UniformGrid {
  double min = 0.0;
  double max = 0.0;
  std::size_t n_nodes = 0;

  UniformGrid() = default;
  UniformGrid(double lo, double hi, std::size_t n);

  /// Grid with spacing `step` (max is snapped to the last node <= hi + eps).
  static UniformGrid with_step(double lo, double hi, double step);

  double step() const noexcept { return (max - min) / static_cast<double>(n_nodes - 1); }
  double node(std::size_t i) const noexcept {
    return i + 1 == n_nodes ? max : min + static_cast<double>(i) * step();
  }
  std::vector<double> nodes() const;
  bool contains(double x) const noexcept { return x >= min && x <= max; }

  /// Same step, `margin` trimmed from each side (rounded to whole steps).
  UniformGrid shrunk(double margin) const;
};

}  // namespace cglab
