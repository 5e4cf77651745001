#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cglab/grid.hpp"
#include "cglab/potential.hpp"
#include "cglab/quadrature.hpp"

namespace cglab {

/// One coarse-graining step of the single-site potential:
///
///   R V(y) = -1/(2B) log \int exp(-B [V(y + x) + V(y - x)]) dx,
///
/// where B is the block size of V (1 for an analytic potential, 2^k for the
/// k-th iterate). With B = 1 this is the pair renormalization of psi; the block
/// weight makes the k-th iterate the per-spin potential of 2^k spins at fixed
/// mean. The result is shifted to min 0; the shift is accumulated in
/// normalization_offset so values + offset is the unnormalized potential.
TabulatedPotential renormalize(const Potential& psi, const UniformGrid& grid, const QuadratureSpec& quad = {},
                               int threads = 1);

/// [R psi, R^2 psi, ..., R^M psi]. Iterate k lives on first_grid shrunk by
/// (k - 1) * margin on each side.
std::vector<TabulatedPotential> iterate_renormalize(const PotentialSpec& psi, int iterations,
                                                    const UniformGrid& first_grid, double margin,
                                                    const QuadratureSpec& quad = {}, int threads = 1);

/// K-site coarse-grained potential psi_K(m) = -(1/K) log \int_{X_{K,m}} exp(-sum psi)
/// for K in {2, 4}, by direct (nested, for K = 4) quadrature over the
/// constraint slice, normalized like renormalize().
TabulatedPotential coarse_grained_direct(const PotentialSpec& psi, int K, const UniformGrid& m_grid,
                                         const QuadratureSpec& quad = {}, int threads = 1);

/// log of the partition function of the canonical ensemble on X_{N,m}
/// (Lebesgue measure of the hyperplane), N in {2, 4}.
double log_canonical_partition(const PotentialSpec& psi, int N, double m, const QuadratureSpec& quad = {});

/// psi_c alone, as a potential with zero perturbation.
PotentialSpec core_potential(const PotentialSpec& psi);

struct Witness {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

struct CertificationReport {
  double rho_p = 0.0;       // largest certified p-convexity constant (secant route)
  double c_uniform = 0.0;   // same with p = 2
  std::size_t n_triples = 0;
  Witness worst_witness;
  std::string method = "secant-inequality";
  double p = 2.0;
  // Advisory second-derivative route: largest c with V'' >= c (p-1) |x|^(p-2)
  // on the interior nodes, and where it is tightest.
  double dd_constant = 0.0;
  double dd_worst_x = 0.0;
  // True when the derivative route recovers at least 1e-3 of the secant constant.
  bool dd_certified = false;
};

/// Secant p-convexity defect of V at a triple, p * [tV(x)+(1-t)V(y)-V(tx+(1-t)y)] / (t(1-t)|x-y|^p).
double secant_ratio(const TabulatedPotential& v, double p, const Witness& w);

/// Samples n_triples (node, node, t in [0.1, 0.9]) from a seeded low-discrepancy
/// sequence; rho_p is the clamped minimum ratio, so it never exceeds the ratio
/// at any tested witness. `window` restricts the nodes used.
CertificationReport certify_p_convexity(const TabulatedPotential& v, double p, std::size_t n_triples,
                                        std::uint64_t seed,
                                        std::optional<std::pair<double, double>> window = std::nullopt);

}  // namespace cglab
