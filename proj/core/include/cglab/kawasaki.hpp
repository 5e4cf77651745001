#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cglab/ensemble.hpp"
#include "cglab/transport.hpp"

namespace cglab {

/// Periodic discrete Laplacian, A_ii = 2, A_{i,i+-1} = -1 (entries add up for N = 2).
Eigen::MatrixXd discrete_laplacian(int N);

/// Symmetric square root by eigendecomposition; eigenvalues below 1e-12 of the
/// spectral radius map to zero. InputError if A is not symmetric, DomainError
/// if it has a clearly negative eigenvalue.
Eigen::MatrixXd operator_sqrt(const Eigen::MatrixXd& A);

enum class InitialLaw { point_mass, gaussian, equilibrium };

std::string_view to_string(InitialLaw law);
InitialLaw initial_law_from_string(std::string_view name);

struct KawasakiConfig {
  int N = 2;
  double h = 0.01;
  double T = 1.0;
  std::size_t n_paths = 256;
  InitialLaw initial_law = InitialLaw::point_mass;
  /// point_mass: X0 = m + shift (projected to zero sum); empty means
  /// shift_amplitude on the first half of the sites and -shift_amplitude on the rest.
  std::vector<double> shift;
  double shift_amplitude = 1.0;
  /// gaussian: standard deviation along the hyperplane.
  double gaussian_scale = 1.0;
  /// equilibrium: starting configurations, at least n_paths rows.
  std::optional<SampleBatch> initial_batch;
  /// Times at which the paths are recorded; empty means n_checkpoints evenly spaced in [0, T].
  std::vector<double> checkpoints;
  std::size_t n_checkpoints = 11;
  bool reproject = true;
  std::uint64_t seed = 0;
  int threads = 1;

  /// h <= 0.1 / 4, N >= 2, T > 0, n_paths >= 1, checkpoints inside [0, T].
  void validate() const;
  std::vector<double> checkpoint_times() const;
};

struct KawasakiRun {
  std::vector<double> times;
  std::vector<SampleBatch> batches;  // one per checkpoint, n_paths x N
  double max_step_drift = 0.0;       // largest |mean change| of a single step before re-projection
  double final_mean_error = 0.0;     // largest |mean(X_T) - m| over paths
  std::size_t steps = 0;
};

/// Euler-Maruyama for dX = -A grad H dt + sqrt(2A) dB; path k draws from
/// seed_seq{seed, k}. BlowUpError if any coordinate leaves [-1e3, 1e3].
KawasakiRun simulate(const CanonicalEnsemble& ensemble, const KawasakiConfig& config);

struct DecayTrace {
  std::vector<double> times;
  std::vector<double> wp_values;  // W_p
  std::vector<double> wp_se;
  std::vector<double> wpp_values;  // W_p^p
  double noise_floor = 0.0;        // W_p^p between two independent equilibrium batches
  double fitted_rate = 0.0;        // -slope of log W_p^p against t over the fit window
  double fit_r2 = 0.0;
  std::size_t fit_points = 0;
  bool inconclusive = false;  // fewer than 3 checkpoints above 3x the noise floor
  double initial_entropy = 0.0;  // NaN when no closed form is available
  double p = 2.0;
  int N = 2;
  double m = 0.0;
  double h = 0.0;
  std::uint64_t seed = 0;
};

/// W_p between each checkpoint batch and `reference`; the noise floor compares
/// `reference` with `floor_reference`. Both must have n_paths rows. The
/// standard error comes from four disjoint quarter-size couplings.
DecayTrace decay_experiment(const CanonicalEnsemble& ensemble, const KawasakiConfig& config, double p,
                            TransportMethod method, const SampleBatch& reference,
                            const SampleBatch& floor_reference, double epsilon = 0.0);

/// Relative entropy of the Gaussian initial law with respect to mu_{N,m},
/// for N in {2, 4}; NaN otherwise. E[H] is a Monte Carlo average over n_mc draws.
double gaussian_initial_entropy(const CanonicalEnsemble& ensemble, double scale, std::size_t n_mc = 100000,
                                std::uint64_t seed = 0);

struct GeneratorCheck {
  double analytic = 0.0;  // L phi(x0)
  double estimate = 0.0;  // Richardson slope of E phi(X_t) at t = 0
  double se = 0.0;
  bool pass = false;  // |estimate - analytic| <= 3 se
};

/// phi(x) = x^T Q x / 2 from the point x0. L phi = -<A grad H, Q x> + tr(A Q).
/// The slope is (4 dE(delta) - dE(2 delta)) / (2 delta) with delta = steps * h.
GeneratorCheck generator_check(const CanonicalEnsemble& ensemble, std::span<const double> x0,
                               const Eigen::MatrixXd& Q, double h, int steps, std::size_t n_paths,
                               std::uint64_t seed);

}  // namespace cglab
