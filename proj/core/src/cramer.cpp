#include "cglab/cramer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cglab/error.hpp"
#include "cglab/parallel.hpp"
#include "cglab/renorm.hpp"

namespace cglab {
namespace {

constexpr double kMeanTol = 1e-10;

MassWindow tilted_window(const PotentialSpec& psi, double sigma, const std::function<double(double)>& logf) {
  const double L = psi.domain_halfwidth();
  try {
    return locate_mass(logf, -L, L);
  } catch (const DomainError& e) {
    throw DomainError("tilt sigma = " + std::to_string(sigma) + " pushes the mass to the truncation edge (" +
                      e.what() + ")");
  }
}

}  // namespace

double log_mgf(const PotentialSpec& psi, double sigma, const QuadratureSpec& quad) {
  quad.validate();
  auto logf = [&](double x) { return sigma * x - psi.eval(x, 0); };
  return log_integrate(logf, tilted_window(psi, sigma, logf), quad, sigma);
}

TiltedMeasure tilt(const PotentialSpec& psi, double sigma, const QuadratureSpec& quad) {
  quad.validate();
  auto logf = [&](double x) { return sigma * x - psi.eval(x, 0); };
  const DensityMoments dm = density_moments(logf, tilted_window(psi, sigma, logf), quad, sigma);
  if (!(dm.variance > 0.0)) throw NumericalError("tilted variance is not positive", sigma);
  TiltedMeasure t;
  t.potential = psi.name();
  t.sigma = sigma;
  t.log_norm = dm.log_mass;
  t.mean = dm.mean;
  t.variance = dm.variance;
  t.third_central_moment = dm.third;
  return t;
}

TiltedMeasure tilt_solve(const PotentialSpec& psi, double m, const QuadratureSpec& quad) {
  if (!std::isfinite(m)) throw InputError("m must be finite");
  if (!psi.contains(m)) throw DomainError("m outside the truncated domain");

  // Newton from the Laplace guess sigma = psi'(m).
  double sigma = psi.eval(m, 1);
  for (int it = 0; it < 100; ++it) {
    TiltedMeasure t;
    try {
      t = tilt(psi, sigma, quad);
    } catch (const DomainError&) {
      break;
    }
    const double g = t.mean - m;
    if (std::abs(g) <= kMeanTol) return t;
    const double next = sigma - g / t.variance;
    if (!std::isfinite(next)) break;
    sigma = next;
  }

  // Bisection on a bracket grown geometrically around sigma = 0; mean(sigma) is increasing.
  auto mean_at = [&](double s) { return tilt(psi, s, quad).mean - m; };
  double lo = 0.0;
  double hi = 0.0;
  double glo = mean_at(0.0);
  double ghi = glo;
  for (double step = 1.0; glo > 0.0 || ghi < 0.0; step *= 2.0) {
    if (step > 1e12) throw NonConvergenceError("no tilt bracket found", std::abs(glo));
    if (glo > 0.0) {
      hi = lo;
      ghi = glo;
      lo = -step;
      glo = mean_at(lo);
    } else {
      lo = hi;
      glo = ghi;
      hi = step;
      ghi = mean_at(hi);
    }
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const TiltedMeasure t = tilt(psi, mid, quad);
    const double g = t.mean - m;
    if (std::abs(g) <= kMeanTol) return t;
    if (g < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) {
      throw NonConvergenceError("tilt bracket collapsed before reaching the mean tolerance", std::abs(g));
    }
  }
  throw NonConvergenceError("tilt bisection did not converge", std::numeric_limits<double>::quiet_NaN());
}

double phi(const PotentialSpec& psi, double m, const QuadratureSpec& quad) {
  const TiltedMeasure t = tilt_solve(psi, m, quad);
  return t.sigma * m - t.log_norm;
}

double phi_dd(const PotentialSpec& psi, double m, const QuadratureSpec& quad) {
  return 1.0 / tilt_solve(psi, m, quad).variance;
}

double phi_ddd(const PotentialSpec& psi, double m, const QuadratureSpec& quad) {
  const TiltedMeasure t = tilt_solve(psi, m, quad);
  return -t.third_central_moment / (t.variance * t.variance * t.variance);
}

DeficitTable cramer_deficit(const PotentialSpec& psi, const TabulatedPotential& psi_K, const UniformGrid& m_grid,
                            const QuadratureSpec& quad, int threads) {
  const double h = psi_K.grid().step();
  std::vector<double> ms;
  for (double m : m_grid.nodes()) {
    if (m - h >= psi_K.grid().min && m + h <= psi_K.grid().max) ms.push_back(m);
  }
  if (ms.size() < 8) {
    throw InsufficientGridError("only " + std::to_string(ms.size()) + " interior points for the deficit table");
  }
  DeficitTable table;
  table.K = psi_K.block_size();
  table.rows.resize(ms.size());
  parallel_for(ms.size(), threads, [&](std::size_t i) {
    const double m = ms[i];
    const TiltedMeasure t = tilt_solve(psi, m, quad);
    DeficitRow& r = table.rows[i];
    r.m = m;
    r.phi = t.sigma * m - t.log_norm;
    r.phi_dd = 1.0 / t.variance;
    r.psi_K_dd = psi_K.eval(m, 2);
    r.deficit = std::abs(r.psi_K_dd - r.phi_dd) / r.phi_dd;
  });
  for (const auto& r : table.rows) table.max_deficit = std::max(table.max_deficit, r.deficit);
  return table;
}

std::vector<TabulatedPotential> coarse_potential_ladder(const PotentialSpec& psi, int M, double halfwidth,
                                                       double step, const QuadratureSpec& quad, int threads) {
  if (M < 1 || M > 20) throw InputError("iteration count must lie in [1, 20]");
  if (!(halfwidth > 0.0) || !(step > 0.0)) throw InputError("halfwidth and step must be positive");
  // Room needed for the pair integrand to fall 45 nats below its peak:
  // psi(y + X) + psi(y - X) - 2 psi(y) >= (min curvature) X^2.
  const double curvature = psi.p() == 2.0 ? 2.0 * psi.c() : psi.c();
  const double margin = std::ceil(std::sqrt(45.0 / curvature) / step) * step;
  const double last = halfwidth + 2.0 * step;
  const double first = last + (M - 1) * margin;
  const auto n = static_cast<std::size_t>(std::llround(2.0 * first / step)) + 1;
  const PotentialSpec wide = psi.with_halfwidth(std::max(psi.domain_halfwidth(), first + margin));
  return iterate_renormalize(wide, M, UniformGrid(-first, first, n), margin, quad, threads);
}

TabulatedPotential coarse_potential(const PotentialSpec& psi, int K, double halfwidth, double step,
                                    const QuadratureSpec& quad, int threads) {
  int M = 0;
  while ((1 << M) < K) ++M;
  if (K < 2 || (1 << M) != K) throw InputError("K must be a power of two >= 2");
  return coarse_potential_ladder(psi, M, halfwidth, step, quad, threads).back();
}

GrowthReport check_p_growth(const PotentialSpec& psi, double p, const UniformGrid& m_grid,
                            const QuadratureSpec& quad, int threads) {
  if (!(p >= 2.0)) throw InputError("p must be >= 2");
  GrowthReport rep;
  rep.p = p;
  const TiltedMeasure base = tilt(psi, 0.0, quad);
  rep.m0 = base.mean;
  const double phi0 = -base.log_norm;  // phi(m0) with sigma = 0

  rep.rows.resize(m_grid.n_nodes);
  parallel_for(m_grid.n_nodes, threads, [&](std::size_t i) {
    const double m = m_grid.node(i);
    const TiltedMeasure t = tilt_solve(psi, m, quad);
    GrowthRow& r = rep.rows[i];
    r.m = m;
    r.phi_gap = t.sigma * m - t.log_norm - phi0;
    r.phi_d = t.sigma;
    r.phi_dd = 1.0 / t.variance;
  });

  double c = std::numeric_limits<double>::infinity();
  double C = std::numeric_limits<double>::infinity();
  double cd = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.rows) {
    const double d = std::abs(r.m - rep.m0);
    C = std::min(C, r.phi_dd / std::pow(d, p - 2.0));
    if (d <= 1e-12) continue;
    c = std::min(c, r.phi_gap / std::pow(d, p));
    cd = std::min(cd, std::abs(r.phi_d) / std::pow(d, p - 1.0));
  }
  rep.c_phi_growth = std::isfinite(c) ? std::max(0.0, c) : 0.0;
  rep.c_phidd_growth = std::isfinite(C) ? std::max(0.0, C) : 0.0;
  rep.c_dphi_growth = std::isfinite(cd) ? std::max(0.0, cd) : 0.0;
  rep.pass = rep.c_phi_growth > 0.0 && rep.c_phidd_growth > 0.0;
  return rep;
}

}  // namespace cglab
