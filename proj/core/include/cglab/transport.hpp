#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace cglab {

struct SampleBatch;

enum class TransportMethod { quantile, matching, sinkhorn };

std::string_view to_string(TransportMethod method);
TransportMethod transport_method_from_string(std::string_view name);

/// W_p between equal-weight empirical measures with l^p ground cost sum_k |a_k - b_k|^p.
struct WassersteinResult {
  double p = 2.0;
  double value = 0.0;  // W_p, not W_p^p
  TransportMethod method = TransportMethod::quantile;
  double epsilon = 0.0;
  double dual_gap = 0.0;
  std::size_t n_points = 0;
  std::size_t iterations = 0;

  double power() const;  // W_p^p
};

/// Monotone coupling of two 1D samples (sorted internally). Unequal sizes are
/// coupled through the common refinement of their quantile functions.
WassersteinResult wasserstein_1d(std::span<const double> a, std::span<const double> b, double p);

/// Optimal assignment between two n x dim row-major point sets (n <= 4096),
/// by shortest augmenting paths with potentials.
WassersteinResult wasserstein_matching(std::span<const double> A, std::span<const double> B, std::size_t dim,
                                       double p);

/// Entropic OT in the log domain with epsilon scaling down to `epsilon`;
/// value is the transport cost of the regularized plan. Converged when the
/// L1 marginal violation is <= 1e-9; NonConvergenceError after max_iter sweeps.
WassersteinResult wasserstein_sinkhorn(std::span<const double> A, std::span<const double> B, std::size_t dim,
                                       double p, double epsilon, std::size_t max_iter = 200000);

/// Median of the pairwise ground costs, the natural unit for epsilon.
double median_cost(std::span<const double> A, std::span<const double> B, std::size_t dim, double p);

/// Dispatch on the method; quantile requires dim == 1.
WassersteinResult wasserstein(const SampleBatch& a, const SampleBatch& b, double p, TransportMethod method,
                              double epsilon = 0.0);

}  // namespace cglab
