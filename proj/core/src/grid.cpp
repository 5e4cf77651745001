#include "cglab/grid.hpp"

#include <cmath>

#include "cglab/error.hpp"

namespace cglab {

UniformGrid::UniformGrid(double lo, double hi, std::size_t n) : min(lo), max(hi), n_nodes(n) {
  if (n < 2 || !(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InputError("grid needs n >= 2 nodes and min < max");
  }
}

UniformGrid UniformGrid::with_step(double lo, double hi, double step) {
  if (!(step > 0.0)) throw InputError("grid step must be positive");
  const auto cells = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  return UniformGrid(lo, lo + static_cast<double>(cells) * step, cells + 1);
}

std::vector<double> UniformGrid::nodes() const {
  std::vector<double> out(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) out[i] = node(i);
  return out;
}

UniformGrid UniformGrid::shrunk(double margin) const {
  const double h = step();
  const auto k = static_cast<std::size_t>(std::ceil(margin / h - 1e-9));
  if (2 * k + 2 > n_nodes) throw InsufficientGridError("margin exhausts the grid");
  return UniformGrid(node(k), node(n_nodes - 1 - k), n_nodes - 2 * k);
}

}  // namespace cglab
