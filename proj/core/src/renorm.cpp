#include "cglab/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cglab/error.hpp"
#include "cglab/parallel.hpp"

namespace cglab {
namespace {

double block_of(const Potential& psi) {
  if (const auto* t = std::get_if<TabulatedPotential>(&psi)) return t->block_size();
  return 1.0;
}

int iteration_of(const Potential& psi) {
  if (const auto* t = std::get_if<TabulatedPotential>(&psi)) return t->iteration_count();
  return 0;
}

double offset_of(const Potential& psi) {
  if (const auto* t = std::get_if<TabulatedPotential>(&psi)) return t->normalization_offset();
  return 0.0;
}

void check_grid_inside(const UniformGrid& grid, std::pair<double, double> dom) {
  if (grid.min <= dom.first || grid.max >= dom.second) {
    throw DomainError("output grid [" + std::to_string(grid.min) + ", " + std::to_string(grid.max) +
                      "] must lie strictly inside the input domain [" + std::to_string(dom.first) + ", " +
                      std::to_string(dom.second) + "]");
  }
}

// Keeps y +- room strictly inside the domain despite rounding.
double shaved(double room) { return room * (1.0 - 1e-12); }

// Shift to min 0 and wrap as a table.
TabulatedPotential normalized(const UniformGrid& grid, std::vector<double> raw, double p, double c, int iteration,
                              double offset_in) {
  const double lo = *std::min_element(raw.begin(), raw.end());
  for (double& v : raw) v -= lo;
  return TabulatedPotential(grid, std::move(raw), p, c, iteration, offset_in + lo);
}

// log \int exp(-psi(a + u) - psi(a - u)) du over |u| <= halfwidth.
double log_pair_integral(const PotentialSpec& psi, double a, double halfwidth, const QuadratureSpec& quad) {
  halfwidth = shaved(halfwidth);
  auto logf = [&](double u) { return -psi.eval(a + u, 0) - psi.eval(a - u, 0); };
  return log_integrate(logf, -halfwidth, halfwidth, quad, a);
}

// log \int dw exp(L2(m + w) + L2(m - w)) with L2 the pair integral; the outer
// window is half the distance to the domain edge, so every inner integral keeps
// at least that much room.
double log_quad_integral(const PotentialSpec& psi, double m, const QuadratureSpec& quad) {
  const double L = psi.domain_halfwidth();
  const double W = 0.5 * (L - std::abs(m));
  if (W <= 0.0) throw DomainError("m outside the potential domain");
  auto logf = [&](double w) {
    const double a = m + w;
    const double b = m - w;
    return log_pair_integral(psi, a, L - std::abs(a), quad) + log_pair_integral(psi, b, L - std::abs(b), quad);
  };
  return log_integrate(logf, -W, W, quad, m);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

TabulatedPotential renormalize(const Potential& psi, const UniformGrid& grid, const QuadratureSpec& quad,
                               int threads) {
  quad.validate();
  const auto dom = domain(psi);
  check_grid_inside(grid, dom);
  const double B = block_of(psi);
  std::vector<double> raw(grid.n_nodes);
  parallel_for(grid.n_nodes, threads, [&](std::size_t i) {
    const double y = grid.node(i);
    const double X = shaved(std::min(dom.second - y, y - dom.first));
    auto logf = [&](double x) { return -B * (eval(psi, y + x, 0) + eval(psi, y - x, 0)); };
    raw[i] = -log_integrate(logf, -X, X, quad, y) / (2.0 * B);
  });
  return normalized(grid, std::move(raw), growth_exponent(psi), convexity_constant(psi), iteration_of(psi) + 1,
                    offset_of(psi));
}

std::vector<TabulatedPotential> iterate_renormalize(const PotentialSpec& psi, int iterations,
                                                    const UniformGrid& first_grid, double margin,
                                                    const QuadratureSpec& quad, int threads) {
  if (iterations < 1) throw InputError("iterations must be >= 1");
  if (!(margin >= 0.0)) throw InputError("margin must be non-negative");
  std::vector<UniformGrid> grids{first_grid};
  for (int k = 2; k <= iterations; ++k) {
    grids.push_back(first_grid.shrunk(margin * (k - 1)));
    if (grids.back().n_nodes < 32) {
      throw InsufficientGridError("iterate " + std::to_string(k) + " has only " +
                                  std::to_string(grids.back().n_nodes) + " nodes left after margin trimming");
    }
  }
  std::vector<TabulatedPotential> out;
  out.reserve(grids.size());
  out.push_back(renormalize(psi, grids[0], quad, threads));
  for (std::size_t k = 1; k < grids.size(); ++k) out.push_back(renormalize(out.back(), grids[k], quad, threads));
  return out;
}

TabulatedPotential coarse_grained_direct(const PotentialSpec& psi, int K, const UniformGrid& m_grid,
                                         const QuadratureSpec& quad, int threads) {
  if (K != 2 && K != 4) throw InputError("direct coarse graining supports K = 2 or 4");
  quad.validate();
  const double L = psi.domain_halfwidth();
  check_grid_inside(m_grid, {-L, L});
  std::vector<double> raw(m_grid.n_nodes);
  parallel_for(m_grid.n_nodes, threads, [&](std::size_t i) {
    const double m = m_grid.node(i);
    const double log_z = K == 2 ? log_pair_integral(psi, m, L - std::abs(m), quad) : log_quad_integral(psi, m, quad);
    raw[i] = -log_z / K;
  });
  return normalized(m_grid, std::move(raw), psi.p(), psi.c(), K == 2 ? 1 : 2, 0.0);
}

double log_canonical_partition(const PotentialSpec& psi, int N, double m, const QuadratureSpec& quad) {
  const double L = psi.domain_halfwidth();
  if (std::abs(m) >= L) throw DomainError("m outside the potential domain");
  // Jacobians of (u) -> (m+u, m-u) and (w,u,v) -> (m+w+u, m+w-u, m-w+v, m-w-v).
  if (N == 2) return 0.5 * std::log(2.0) + log_pair_integral(psi, m, L - std::abs(m), quad);
  if (N == 4) return std::log(4.0) + log_quad_integral(psi, m, quad);
  throw InputError("canonical partition supports N = 2 or 4");
}

PotentialSpec core_potential(const PotentialSpec& psi) {
  SmoothFunction core{[psi](double x) { return psi.core(x, 0); }, [psi](double x) { return psi.core(x, 1); },
                      [psi](double x) { return psi.core(x, 2); }};
  SmoothFunction zero{[](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
  return PotentialSpec::custom(psi.name() + "-core", psi.p(), psi.c(), std::move(core), std::move(zero),
                               psi.domain_halfwidth());
}

double secant_ratio(const TabulatedPotential& v, double p, const Witness& w) {
  const double z = w.t * w.x + (1.0 - w.t) * w.y;
  const double defect = w.t * v.eval(w.x, 0) + (1.0 - w.t) * v.eval(w.y, 0) - v.eval(z, 0);
  return p * defect / (w.t * (1.0 - w.t) * std::pow(std::abs(w.x - w.y), p));
}

CertificationReport certify_p_convexity(const TabulatedPotential& v, double p, std::size_t n_triples,
                                        std::uint64_t seed, std::optional<std::pair<double, double>> window) {
  if (!(p >= 2.0)) throw InputError("p must be >= 2");
  if (n_triples == 0) throw InputError("n_triples must be positive");
  const UniformGrid& g = v.grid();
  if (g.n_nodes < 64) throw InsufficientGridError("certification needs at least 64 grid nodes");

  std::size_t first = 0;
  std::size_t last = g.n_nodes - 1;
  if (window) {
    if (!(window->first < window->second)) throw InputError("empty certification window");
    while (first < g.n_nodes && g.node(first) < window->first) ++first;
    while (last > 0 && g.node(last) > window->second) --last;
    if (last < first + 3) throw InsufficientGridError("certification window holds fewer than 4 nodes");
  }
  const std::size_t span = last - first + 1;
  const auto& vals = v.values();

  // R3 low-discrepancy sequence (additive recurrence on the plastic-like root of x^4 = x + 1).
  constexpr double phi3 = 1.2207440846057594;
  const double alpha[3] = {1.0 / phi3, 1.0 / (phi3 * phi3), 1.0 / (phi3 * phi3 * phi3)};
  std::uint64_t state = seed;
  double start[3];
  for (double& s : start) s = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;

  CertificationReport rep;
  rep.p = p;
  double best_rho = std::numeric_limits<double>::infinity();
  double best_c = std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  for (std::size_t n = 1; used < n_triples && n <= 8 * n_triples; ++n) {
    double u[3];
    for (int d = 0; d < 3; ++d) {
      const double raw = start[d] + static_cast<double>(n) * alpha[d];
      u[d] = raw - std::floor(raw);
    }
    const std::size_t i = first + std::min(span - 1, static_cast<std::size_t>(u[0] * static_cast<double>(span)));
    const std::size_t j = first + std::min(span - 1, static_cast<std::size_t>(u[1] * static_cast<double>(span)));
    if (i == j) continue;
    const Witness w{g.node(i), g.node(j), 0.1 + 0.8 * u[2]};
    const double z = w.t * w.x + (1.0 - w.t) * w.y;
    const double defect = w.t * vals[i] + (1.0 - w.t) * vals[j] - v.eval(z, 0);
    const double tt = w.t * (1.0 - w.t);
    const double d = std::abs(w.x - w.y);
    const double rho = p * defect / (tt * std::pow(d, p));
    const double c = 2.0 * defect / (tt * d * d);
    if (rho < best_rho) {
      best_rho = rho;
      rep.worst_witness = w;
    }
    best_c = std::min(best_c, c);
    ++used;
  }
  rep.n_triples = used;
  rep.rho_p = std::max(0.0, best_rho);
  rep.c_uniform = std::max(0.0, best_c);

  const double h = g.step();
  double dd = std::numeric_limits<double>::infinity();
  for (std::size_t i = std::max<std::size_t>(first, 1); i <= std::min(last, g.n_nodes - 2); ++i) {
    const double x = g.node(i);
    const double second = (vals[i - 1] - 2.0 * vals[i] + vals[i + 1]) / (h * h);
    const double weight = (p - 1.0) * std::pow(std::abs(x), p - 2.0);
    if (weight <= 0.0) continue;
    const double ratio = second / weight;
    if (ratio < dd) {
      dd = ratio;
      rep.dd_worst_x = x;
    }
  }
  rep.dd_constant = std::isfinite(dd) ? std::max(0.0, dd) : 0.0;
  rep.dd_certified = rep.rho_p > 0.0 && rep.dd_constant >= 1e-3 * rep.rho_p;
  return rep;
}

}  // namespace cglab
