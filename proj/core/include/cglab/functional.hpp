#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cglab/ensemble.hpp"

namespace cglab {

/// q = p / (p - 1); checks 1/p + 1/q = 1 to 1e-14.
double dual_exponent(double p);

/// Finite weighted point set, row-major support of n points in `dim` coordinates.
struct DiscretizedMeasure {
  std::size_t dim = 1;
  std::vector<double> support;
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  std::span<const double> point(std::size_t i) const { return {support.data() + i * dim, dim}; }
  /// Throws InputError unless weights are nonnegative, sum to 1 within 1e-12 and match the support.
  void validate() const;

  /// exp(log_density) sampled on lo, lo + step, ..., hi and normalized.
  static DiscretizedMeasure from_log_density_1d(const std::function<double(double)>& log_density, double lo,
                                                double hi, double step);
};

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Ent(f) = E[f log f] - E[f] log E[f]. DomainError on any f <= 0.
double entropy(std::span<const double> f, const DiscretizedMeasure& mu);
/// Empirical version on equally weighted samples, with jackknife standard error.
Estimate entropy(std::span<const double> f, const SampleBatch& batch);

/// E[ |grad f|_q^q / f^(q-1) ]; grad is row-major with one row per support point.
double mlsi_energy(std::span<const double> f, std::span<const double> grad, const DiscretizedMeasure& mu, double q);
Estimate mlsi_energy(std::span<const double> f, std::span<const double> grad, const SampleBatch& batch, double q);

struct FamilySpec {
  std::string id;
  std::vector<TestFunction> members;
  /// Project gradients onto {sum v = 0}, the tangent space of a mean-constraint hyperplane.
  bool tangential = false;
};

/// exp(lambda g) for g among coordinates, pairwise differences and smoothed
/// indicators tanh((x_k - s) / 0.5), s in {-1, 0, 1}, with lambda = +/- the
/// given magnitudes (default: 12 log-spaced values in [0.01, 3]).
FamilySpec default_tilt_family(std::size_t dim, std::vector<double> magnitudes = {});

/// exp(lambda x_k) only, for each coordinate.
FamilySpec coordinate_tilt_family(std::size_t dim, std::vector<double> magnitudes = {});

struct MlsiEstimate {
  double p = 2.0;
  double q = 2.0;
  double rho_hat = 0.0;  // infimum of energy / entropy over the family
  std::string family_id;
  std::size_t n_functions = 0;  // members with entropy above 1e-12
  std::string argmin_id;
};

MlsiEstimate estimate_best_rho(const DiscretizedMeasure& mu, double p, const FamilySpec& family);
MlsiEstimate estimate_best_rho(const SampleBatch& batch, double p, const FamilySpec& family);

/// (rho / q)^(q - 1), the constant for a uniformly p-convex potential.
double bakry_emery(double rho, double p);
double tensorize(double rho1, double rho2);

struct HolleyStroock {
  double value = 0.0;    // exp(-2 osc) rho
  double literal = 0.0;  // exp(+2 osc) rho, recorded for comparison
};
HolleyStroock holley_stroock(double rho, double osc_value);

/// Concentration constant implied through the Herbst argument: (rho / q)^(p - 1).
double herbst_concentration_constant(double rho, double p);

struct LaplaceRow {
  double lambda = 0.0;
  double log_lhs = 0.0;
  double log_rhs = 0.0;
  double margin = 0.0;  // log_rhs - log_lhs
};

struct LaplaceReport {
  std::vector<LaplaceRow> rows;
  double max_slope = 0.0;
  double worst_margin = 0.0;
  bool pass = false;  // all margins >= -1e-9
};

/// log E exp(lambda (f - E f)) against lambda^q / (rho (q - 1)) for each lambda >= 0.
/// InputError if f is not 1-Lipschitz between neighboring support points.
LaplaceReport laplace_bound_check(const DiscretizedMeasure& mu, const std::function<double(double)>& f, double rho,
                                  double q, std::span<const double> lambdas);

struct TailRow {
  double r = 0.0;
  double empirical = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double bound = 0.0;
  bool ok = false;  // bound not below the confidence interval
};

struct ConcentrationReport {
  std::vector<TailRow> rows;
  double mean = 0.0;
  bool pass = false;
};

/// Empirical P(f >= E f + r) with Wilson intervals (z = 3) against
/// exp(-c r^p / (p (p-1)^(p-1))).
ConcentrationReport concentration_check(const SampleBatch& batch,
                                        const std::function<double(std::span<const double>)>& f, double c, double p,
                                        std::span<const double> r_grid);

struct TalagrandReport {
  double p = 2.0;
  double rho_tilde = 0.0;
  double wpp = 0.0;  // W_p^p(mu, nu)
  double wpp_se = 0.0;
  double entropy = 0.0;  // Ent_mu(nu)
  double entropy_se = 0.0;
  double bound = 0.0;  // (p / rho_tilde) Ent
  double margin = 0.0;
  double margin_se = 0.0;
  bool pass = false;  // margin >= -3 margin_se
};

/// W_p^p between the batches (quantile coupling in 1D, matching otherwise),
/// bootstrap standard error from `n_boot` resamples; Ent_mu(nu) as the nu-average
/// of the log density ratio.
TalagrandReport talagrand_check(const SampleBatch& mu_batch, const SampleBatch& nu_batch,
                                const std::function<double(std::span<const double>)>& log_density_ratio, double p,
                                double rho_tilde, std::size_t n_boot = 200, std::uint64_t seed = 0);

struct DecompositionReport {
  double total = 0.0;        // Ent_mu(f)
  double coarse = 0.0;       // Ent_mubar(fbar)
  double conditional = 0.0;  // sum_y mubar(y) Ent_{mu(.|y)}(f)
  double residual = 0.0;
};

/// Ent_mu(f) = Ent_mubar(fbar) + E_mubar[Ent_{mu(.|y)}(f)], with blocks given by
/// partition[i] in [0, max]. PartitionError for an empty or zero-mass block.
DecompositionReport entropy_decomposition_check(const DiscretizedMeasure& joint, std::span<const std::size_t> partition,
                                                std::span<const double> f);

}  // namespace cglab
