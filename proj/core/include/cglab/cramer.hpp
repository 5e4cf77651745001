#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cglab/grid.hpp"
#include "cglab/potential.hpp"
#include "cglab/quadrature.hpp"

namespace cglab {

/// The exponential tilt exp(sigma x - psi(x) - log_norm) of a single-site potential.
struct TiltedMeasure {
  std::string potential;  // name of the tilted potential
  double sigma = 0.0;
  double log_norm = 0.0;  // phi*(sigma)
  double mean = 0.0;
  double variance = 0.0;
  double third_central_moment = 0.0;
};

/// phi*(sigma) = log \int exp(sigma x - psi(x)) dx over the truncated domain.
double log_mgf(const PotentialSpec& psi, double sigma, const QuadratureSpec& quad = {});

/// Moments of the tilt at a given sigma. The quadrature window is centered on
/// the tilted mode; DomainError if the mass reaches the truncation edge.
TiltedMeasure tilt(const PotentialSpec& psi, double sigma, const QuadratureSpec& quad = {});

/// The tilt whose mean is m: safeguarded Newton (|mean - m| <= 1e-10), falling
/// back to bisection on a geometrically grown bracket.
TiltedMeasure tilt_solve(const PotentialSpec& psi, double m, const QuadratureSpec& quad = {});

/// Legendre transform phi(m) = sigma_m m - phi*(sigma_m).
double phi(const PotentialSpec& psi, double m, const QuadratureSpec& quad = {});
/// phi''(m) = 1 / Var(mu^{sigma_m})
double phi_dd(const PotentialSpec& psi, double m, const QuadratureSpec& quad = {});
/// phi'''(m) = -(third central moment) / variance^3
double phi_ddd(const PotentialSpec& psi, double m, const QuadratureSpec& quad = {});

struct DeficitRow {
  double m = 0.0;
  double phi = 0.0;
  double phi_dd = 0.0;
  double psi_K_dd = 0.0;
  double deficit = 0.0;  // |psi_K'' - phi''| / phi''
};

struct DeficitTable {
  double K = 0.0;
  std::vector<DeficitRow> rows;
  double max_deficit = 0.0;
};

/// Relative gap between psi_K'' (centered second difference of the table) and
/// phi'' at the nodes of m_grid. Nodes where the second difference would leave
/// the table are dropped; fewer than 8 survivors is an InsufficientGridError.
DeficitTable cramer_deficit(const PotentialSpec& psi, const TabulatedPotential& psi_K, const UniformGrid& m_grid,
                            const QuadratureSpec& quad = {}, int threads = 1);

/// psi_K for K = 2^M by iterated renormalization, tabulated on [-halfwidth, halfwidth]
/// at the given step. The potential's truncation and the per-iteration margin
/// are chosen from its convexity constant.
TabulatedPotential coarse_potential(const PotentialSpec& psi, int K, double halfwidth, double step,
                                    const QuadratureSpec& quad = {}, int threads = 1);

/// [R psi, ..., R^M psi] planned the same way; every iterate covers [-halfwidth, halfwidth].
std::vector<TabulatedPotential> coarse_potential_ladder(const PotentialSpec& psi, int M, double halfwidth,
                                                       double step, const QuadratureSpec& quad = {},
                                                       int threads = 1);

struct GrowthRow {
  double m = 0.0;
  double phi_gap = 0.0;  // phi(m) - phi(m0)
  double phi_d = 0.0;    // phi'(m) = sigma_m
  double phi_dd = 0.0;
};

struct GrowthReport {
  double p = 2.0;
  double m0 = 0.0;
  double c_phi_growth = 0.0;    // largest c with phi(m) - phi(m0) >= c |m - m0|^p
  double c_phidd_growth = 0.0;  // largest C with phi''(m) >= C |m - m0|^(p-2)
  double c_dphi_growth = 0.0;   // largest c' with |phi'(m)| >= c' |m - m0|^(p-1)
  bool pass = false;
  std::vector<GrowthRow> rows;
};

/// Pointwise growth constants of phi around m0 = mean of the untilted measure,
/// each the minimum ratio over the grid (points at m0 hold trivially and are skipped).
GrowthReport check_p_growth(const PotentialSpec& psi, double p, const UniformGrid& m_grid,
                            const QuadratureSpec& quad = {}, int threads = 1);

}  // namespace cglab
