#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace cglab {

enum class QuadratureRule { gauss_kronrod, simpson };

struct QuadratureSpec {
  QuadratureRule rule = QuadratureRule::gauss_kronrod;
  double rel_tol = 1e-10;
  int max_subdivisions = 512;
  bool logsumexp_shift = true;  // kept for the record; integration always shifts

  void validate() const;
};

template <std::size_t K>
struct QuadratureOutcome {
  std::array<double, K> value{};
  double error = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t K>
struct Segment {
  double a, b;
  std::array<double, K> value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// One G7/K15 panel with the QUADPACK error heuristic, applied per component.
template <std::size_t K, class F>
Segment<K> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<std::array<double, K>, 15> fv;
  fv[7] = f(c);
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[static_cast<std::size_t>(j)];
    fv[static_cast<std::size_t>(j)] = f(c - dx);
    fv[static_cast<std::size_t>(14 - j)] = f(c + dx);
  }
  Segment<K> seg{a, b, {}, 0.0};
  for (std::size_t k = 0; k < K; ++k) {
    double kron = kWgk[7] * fv[7][k];
    double gauss = kWg[3] * fv[7][k];
    double absk = std::abs(kron);
    for (std::size_t j = 0; j < 7; ++j) {
      const double pair = fv[j][k] + fv[14 - j][k];
      kron += kWgk[j] * pair;
      absk += kWgk[j] * (std::abs(fv[j][k]) + std::abs(fv[14 - j][k]));
      if (j % 2 == 1) gauss += kWg[j / 2] * pair;
    }
    const double mean = 0.5 * kron;
    double asc = kWgk[7] * std::abs(fv[7][k] - mean);
    for (std::size_t j = 0; j < 7; ++j) {
      asc += kWgk[j] * (std::abs(fv[j][k] - mean) + std::abs(fv[14 - j][k] - mean));
    }
    kron *= h;
    gauss *= h;
    absk *= std::abs(h);
    asc *= std::abs(h);
    double err = std::abs(kron - gauss);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double floor = 50.0 * std::numeric_limits<double>::epsilon() * absk;
    err = std::max(err, floor);
    seg.value[k] = kron;
    seg.error = std::max(seg.error, err);
  }
  return seg;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) for an R^K-valued integrand.
/// `breakpoints` seeds the initial partition; the error target is
/// rel_tol * max_k |I_k| (plus a tiny absolute floor).
template <std::size_t K, class F>
QuadratureOutcome<K> integrate_gauss_kronrod(F&& f, std::span<const double> breakpoints,
                                             double rel_tol, int max_subdivisions) {
  std::priority_queue<detail::Segment<K>> heap;
  std::array<double, K> total{};
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    auto seg = detail::gk15<K>(f, breakpoints[i], breakpoints[i + 1]);
    for (std::size_t k = 0; k < K; ++k) total[k] += seg.value[k];
    total_err += seg.error;
    heap.push(seg);
  }
  auto scale = [&] {
    double s = 0.0;
    for (double v : total) s = std::max(s, std::abs(v));
    return s;
  };
  int subdivisions = static_cast<int>(heap.size());
  while (total_err > rel_tol * scale() + 1e-300 && subdivisions < max_subdivisions) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gk15<K>(f, worst.a, mid);
    auto right = detail::gk15<K>(f, mid, worst.b);
    for (std::size_t k = 0; k < K; ++k) total[k] += left.value[k] + right.value[k] - worst.value[k];
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }
  // Re-sum to shed the drift of the running updates.
  std::array<double, K> sum{};
  double err = 0.0;
  while (!heap.empty()) {
    const auto& s = heap.top();
    for (std::size_t k = 0; k < K; ++k) sum[k] += s.value[k];
    err += s.error;
    heap.pop();
  }
  QuadratureOutcome<K> out;
  out.value = sum;
  out.error = err;
  out.subdivisions = subdivisions;
  double s = 0.0;
  for (double v : sum) s = std::max(s, std::abs(v));
  out.converged = err <= rel_tol * s + 1e-300;
  return out;
}

/// Composite Simpson, doubling the panel count from 64 until two successive
/// estimates agree to rel_tol or the count exceeds 64 * max_subdivisions.
template <std::size_t K, class F>
QuadratureOutcome<K> integrate_simpson(F&& f, double a, double b, double rel_tol, int max_subdivisions) {
  std::size_t n = 64;
  const std::size_t n_max = 64 * static_cast<std::size_t>(std::max(1, max_subdivisions));
  std::vector<std::array<double, K>> samples(n + 1);
  for (std::size_t i = 0; i <= n; ++i) samples[i] = f(a + (b - a) * static_cast<double>(i) / static_cast<double>(n));
  auto simpson = [&](const std::vector<std::array<double, K>>& s) {
    const std::size_t m = s.size() - 1;
    const double h = (b - a) / static_cast<double>(m);
    std::array<double, K> acc{};
    for (std::size_t k = 0; k < K; ++k) {
      double v = s[0][k] + s[m][k];
      for (std::size_t i = 1; i < m; ++i) v += (i % 2 ? 4.0 : 2.0) * s[i][k];
      acc[k] = v * h / 3.0;
    }
    return acc;
  };
  auto prev = simpson(samples);
  QuadratureOutcome<K> out;
  while (true) {
    const std::size_t m = 2 * n;
    std::vector<std::array<double, K>> finer(m + 1);
    for (std::size_t i = 0; i <= n; ++i) finer[2 * i] = samples[i];
    for (std::size_t i = 0; i < n; ++i) {
      finer[2 * i + 1] = f(a + (b - a) * static_cast<double>(2 * i + 1) / static_cast<double>(m));
    }
    auto cur = simpson(finer);
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      diff = std::max(diff, std::abs(cur[k] - prev[k]));
      scale = std::max(scale, std::abs(cur[k]));
    }
    samples = std::move(finer);
    n = m;
    out.value = cur;
    out.error = diff;
    out.subdivisions = static_cast<int>(n);
    if (diff <= rel_tol * scale) {
      out.converged = true;
      return out;
    }
    if (2 * n > n_max) return out;
    prev = cur;
  }
}

/// Region carrying the mass of exp(logf): the peak and the interval where
/// logf stays above peak - cut_depth.
struct MassWindow {
  double lo = 0.0;
  double hi = 0.0;
  double peak = 0.0;
  double log_peak = 0.0;
};

/// Locates the mass of exp(logf) inside [lo, hi]: coarse scan, golden-section
/// refinement of the maximum, then geometric stepping outward. Throws
/// DomainError when the integrand has not underflowed (relative e^-edge_depth)
/// at a bound of [lo, hi].
MassWindow locate_mass(const std::function<double(double)>& logf, double lo, double hi,
                       double cut_depth = 45.0, double edge_depth = 36.0);

/// log of the integral of exp(logf) over the window, evaluated with the
/// log-sum-exp shift by the window maximum. Throws NumericalError carrying
/// `tag` on non-convergence.
double log_integrate(const std::function<double(double)>& logf, const MassWindow& window,
                     const QuadratureSpec& quad, double tag);

/// Convenience: locate_mass + log_integrate.
double log_integrate(const std::function<double(double)>& logf, double lo, double hi,
                     const QuadratureSpec& quad, double tag);

/// Moments of the normalized density exp(logf) on the window.
struct DensityMoments {
  double log_mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double third = 0.0;   // third central moment
  double fourth = 0.0;  // fourth central moment
};

DensityMoments density_moments(const std::function<double(double)>& logf, const MassWindow& window,
                               const QuadratureSpec& quad, double tag);

}  // namespace cglab
