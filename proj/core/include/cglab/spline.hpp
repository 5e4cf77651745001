#pragma once

#include <span>
#include <vector>

#include "cglab/grid.hpp"

namespace cglab {

/// Not-a-knot cubic spline on a uniform grid. Reproduces cubic data exactly,
/// which keeps quadratic potentials free of interpolation error.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(UniformGrid grid, std::span<const double> values);

  double operator()(double x) const { return eval(x, 0); }
  /// order 0, 1 or 2; x is clamped to the grid by the caller.
  double eval(double x, int order) const;

  const UniformGrid& grid() const noexcept { return grid_; }

 private:
  UniformGrid grid_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the nodes
};

}  // namespace cglab
