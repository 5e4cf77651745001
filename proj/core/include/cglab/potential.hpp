#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cglab/grid.hpp"
#include "cglab/spline.hpp"

namespace cglab {

enum class PotentialKind { gaussian, quadratic_plus_power, double_well, quadratic_plus_cosine, custom };

std::string_view to_string(PotentialKind kind);

/// A scalar function with its first two derivatives. `d2` may be empty for
/// perturbations, which only need a value and a slope.
struct SmoothFunction {
  std::function<double(double)> f;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

/// Single-site potential psi = core + perturbation, with the core uniformly
/// convex and p-convex (core'' >= c (1 + |x|^(p-2))) and the perturbation
/// bounded with bounded slope. Immutable once built.
class PotentialSpec {
 public:
  static PotentialSpec gaussian();
  /// a x^2/2 + b |x|^p
  static PotentialSpec quadratic_plus_power(double a, double b, double p);
  /// a x^2/2 + b cos(x); the cosine is the perturbation.
  static PotentialSpec quadratic_plus_cosine(double a, double b);
  /// A potential supplied as its own decomposition. halfwidth <= 0 picks the default truncation.
  static PotentialSpec custom(std::string name, double p, double c, SmoothFunction core,
                              SmoothFunction perturbation, double halfwidth = 0.0);

  /// Copy with a different truncation radius.
  PotentialSpec with_halfwidth(double halfwidth) const;

  PotentialKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double p() const noexcept { return p_; }
  double c() const noexcept { return c_; }
  double domain_halfwidth() const noexcept { return halfwidth_; }
  double perturbation_sup() const noexcept { return pert_sup_; }
  double perturbation_slope_sup() const noexcept { return pert_slope_sup_; }

  bool contains(double x) const noexcept { return x >= -halfwidth_ && x <= halfwidth_; }

  /// psi and its derivatives (order 0, 1, 2); throws DomainError off the domain.
  double eval(double x, int order) const;
  double core(double x, int order) const;
  /// order 0 or 1
  double perturbation(double x, int order) const;

  const SmoothFunction& perturbation_function() const noexcept { return pert_; }

 private:
  friend PotentialSpec make_double_well();
  PotentialSpec() = default;
  void finalize(double halfwidth);
  void check(double x) const;

  PotentialKind kind_ = PotentialKind::custom;
  std::string name_;
  double p_ = 2.0;
  double c_ = 0.0;
  double halfwidth_ = 0.0;
  double pert_sup_ = 0.0;
  double pert_slope_sup_ = 0.0;
  SmoothFunction full_;
  SmoothFunction core_;
  SmoothFunction pert_;
};

/// psi(x) = (x^2 - 1)^2 with the core replaced on |x| < sqrt(15/11) by the
/// solution of core'' = 1 + x^2 matched in value and slope.
PotentialSpec make_double_well();

/// Radius where the matched fill-in of the double-well core meets psi.
double double_well_matching_radius();

/// Grid-sampled potential, typically the output of a renormalization step.
/// `iteration_count` k means the values are the per-spin potential of a block
/// of 2^k original spins.
class TabulatedPotential {
 public:
  TabulatedPotential(UniformGrid grid, std::vector<double> values, double p, double c,
                     int iteration_count = 0, double normalization_offset = 0.0);

  const UniformGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double p() const noexcept { return p_; }
  double c() const noexcept { return c_; }
  int iteration_count() const noexcept { return iteration_count_; }
  double normalization_offset() const noexcept { return offset_; }
  /// 2^iteration_count
  double block_size() const noexcept;

  bool contains(double x) const noexcept { return grid_.contains(x); }
  /// Spline value/slope (order 0, 1); centered second difference at the grid
  /// step (order 2, BoundaryError within one step of either end).
  double eval(double x, int order) const;

 private:
  UniformGrid grid_;
  std::vector<double> values_;
  double p_;
  double c_;
  int iteration_count_;
  double offset_;
  CubicSpline spline_;
};

/// Sample an analytic potential on a grid (iteration count 0).
TabulatedPotential tabulate(const PotentialSpec& psi, const UniformGrid& grid);

/// The single-site potential of the coarse lattice: block_size * values, as an
/// iteration-0 table. For Rpsi this is 2 Rpsi, the potential of the pushforward
/// measure under pair averaging.
TabulatedPotential coarse_site_potential(const TabulatedPotential& v);

using Potential = std::variant<PotentialSpec, TabulatedPotential>;

double eval(const Potential& potential, double x, int order);
bool contains(const Potential& potential, double x);
/// Closed domain [lo, hi] on which eval(., 0) is defined.
std::pair<double, double> domain(const Potential& potential);
double growth_exponent(const Potential& potential);
double convexity_constant(const Potential& potential);

struct OscResult {
  double value = 0.0;       // sup - inf
  double resolution = 0.0;  // grid spacing used
};

/// sup f - inf f over [-halfwidth, halfwidth] on `n` points (local extrema refined).
/// Throws UnboundedError when |f| on the doubled interval grows past twice its
/// bound on the original one.
OscResult osc(const std::function<double(double)>& f, double halfwidth, std::size_t n = 200001);
OscResult osc(const PotentialSpec& psi);

}  // namespace cglab
