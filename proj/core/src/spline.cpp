#include "cglab/spline.hpp"

#include <algorithm>
#include <cmath>

#include "cglab/error.hpp"

namespace cglab {

CubicSpline::CubicSpline(UniformGrid grid, std::span<const double> values)
    : grid_(grid), y_(values.begin(), values.end()), m_(values.size(), 0.0) {
  const std::size_t n = y_.size();
  if (n != grid_.n_nodes) throw InputError("spline: value count does not match grid");
  if (n < 4) throw InsufficientGridError("spline needs at least 4 nodes");

  const double h = grid_.step();
  // Interior equations M[i-1] + 4M[i] + M[i+1] = 6 d2y[i] / h^2 for i = 1..n-2.
  // Not-a-knot closes the system with M0 = 2M1 - M2 and M[n-1] = 2M[n-2] - M[n-3],
  // which turns the first and last interior rows into 6M1 = r1 and 6M[n-2] = r[n-2].
  const std::size_t k = n - 2;
  std::vector<double> sub(k, 1.0), diag(k, 4.0), sup(k, 1.0), rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    rhs[i] = 6.0 * (y_[i] - 2.0 * y_[i + 1] + y_[i + 2]) / (h * h);
  }
  diag[0] = 6.0;
  sup[0] = 0.0;
  diag[k - 1] = 6.0;
  sub[k - 1] = 0.0;

  for (std::size_t i = 1; i < k; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> sol(k);
  sol[k - 1] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) sol[i] = (rhs[i] - sup[i] * sol[i + 1]) / diag[i];

  for (std::size_t i = 0; i < k; ++i) m_[i + 1] = sol[i];
  m_[0] = 2.0 * m_[1] - m_[2];
  m_[n - 1] = 2.0 * m_[n - 2] - m_[n - 3];
}

double CubicSpline::eval(double x, int order) const {
  const double h = grid_.step();
  const std::size_t n = y_.size();
  double s = (x - grid_.min) / h;
  auto i = static_cast<std::ptrdiff_t>(std::floor(s));
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 2);
  const auto j = static_cast<std::size_t>(i);
  const double a = (grid_.min + static_cast<double>(j + 1) * h - x) / h;  // weight of left node
  const double b = 1.0 - a;
  const double m0 = m_[j], m1 = m_[j + 1];
  switch (order) {
    case 0:
      return a * y_[j] + b * y_[j + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
    case 1:
      return (y_[j + 1] - y_[j]) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
    case 2:
      return a * m0 + b * m1;
    default:
      throw InputError("spline derivative order must be 0, 1 or 2");
  }
}

}  // namespace cglab
