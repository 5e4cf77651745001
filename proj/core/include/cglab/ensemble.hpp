#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cglab/potential.hpp"

namespace cglab {

/// Pairwise means (x1+x2)/2, (x3+x4)/2, ...; InputError for odd length.
std::vector<double> coarse_grain(std::span<const double> x);

/// Transpose of coarse_grain: y -> (y1/2, y1/2, y2/2, y2/2, ...).
std::vector<double> coarse_grain_adjoint(std::span<const double> y);

/// The single-site measure exp(-sum psi(x_i)) conditioned on (1/N) sum x_i = m.
struct CanonicalEnsemble {
  int N = 2;
  double m = 0.0;
  Potential potential = PotentialSpec::gaussian();

  void validate() const;
  double energy(std::span<const double> x) const;
};

/// Row-major configurations with chain metadata. Immutable once returned.
struct SampleBatch {
  std::size_t n_samples = 0;
  std::size_t dim = 0;
  std::vector<double> data;
  std::uint64_t seed = 0;
  double ess = 0.0;
  std::size_t thinning = 1;
  double acceptance_rate = 0.0;
  bool tuning_warning = false;  // acceptance rate outside [0.05, 0.95]

  std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
  /// Column j as a vector.
  std::vector<double> column(std::size_t j) const;
};

struct SamplerSettings {
  std::size_t n_samples = 1000;
  double step_scale = 1.0;
  std::size_t burn_in = 1000;  // sweeps
  std::size_t thinning = 1;    // sweeps between stored samples
  std::uint64_t seed = 0;
};

/// Pair-exchange Metropolis: a sweep is N proposals x_i += d, x_j -= d with
/// d ~ Normal(0, step_scale^2); the chain starts at (m, ..., m) and is
/// re-projected onto the mean after every sweep. ESS is computed from the
/// energy trace of the stored samples.
SampleBatch sample_canonical(const CanonicalEnsemble& ensemble, const SamplerSettings& settings);

/// Effective sample size of a scalar trace (Geyer initial positive sequence).
double effective_sample_size(std::span<const double> trace);

/// The two-site conditional u -> exp(-psi(y+u) - psi(y-u)), normalized as a
/// piecewise-linear density on the symmetric grid u_k = k h, |k| <= n.
class TwoSiteConditional {
 public:
  double y() const noexcept { return y_; }
  double halfwidth() const noexcept { return halfwidth_; }
  const std::vector<double>& nodes() const noexcept { return u_; }
  const std::vector<double>& density() const noexcept { return w_; }
  double mass() const;
  /// Raw moment E[u^k]; odd moments cancel pairwise.
  double moment(int k) const;
  /// Inverse CDF at v in [0, 1].
  double quantile(double v) const;
  template <class Rng>
  double sample(Rng& rng) const {
    return quantile(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  }

 private:
  friend TwoSiteConditional two_site_conditional(const Potential&, double, std::size_t, std::optional<double>);
  double y_ = 0.0;
  double halfwidth_ = 0.0;
  std::vector<double> u_;
  std::vector<double> w_;
  std::vector<double> cdf_;
};

/// n_points is rounded up to odd. Without u_halfwidth the grid covers the
/// region where the integrand is within 45 nats of its peak.
TwoSiteConditional two_site_conditional(const Potential& psi, double y, std::size_t n_points,
                                        std::optional<double> u_halfwidth = std::nullopt);

/// Smooth positive test function with gradient.
struct TestFunction {
  std::string name;
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
};

struct GradientIdentityReport {
  std::vector<double> lhs;       // finite-difference gradient of the conditional mean
  std::vector<double> rhs;       // 2P E[grad f] - 2P cov(f, grad H)
  std::vector<double> residual;  // lhs - rhs
  std::vector<double> se;        // MC standard error of the residual
  std::vector<double> residual_plus;  // lhs - (2P E[grad f] + 2P cov(f, grad H))
  std::vector<double> se_plus;
  double scale = 0.0;
  bool inconclusive = false;  // some se above half the identity's scale
  bool pass = false;          // every |residual| <= 3 se
  std::size_t n_mc = 0;
};

/// Checks grad_y fbar(y) = 2P E[grad f | y] - 2P cov(f, grad H | y), where
/// fbar(y) = E[f | Px = y]. The left side uses centered differences in y with
/// common random numbers; both sides share the conditional samples.
GradientIdentityReport check_gradient_identity(const CanonicalEnsemble& ensemble, const TestFunction& f,
                                               std::span<const double> y, std::size_t n_mc, std::uint64_t seed,
                                               double fd_step = 1e-3, std::size_t n_points = 4001);

struct NormInequality {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// |2Px|_q^q <= 2^q |x|_q^q
NormInequality coarse_norm_inequality(std::span<const double> x, double q);
/// |(id - 2P^t P)x|_q^q <= |x|_q^q
NormInequality fluctuation_norm_inequality(std::span<const double> x, double q);

}  // namespace cglab
