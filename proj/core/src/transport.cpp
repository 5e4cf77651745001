#include "cglab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "cglab/ensemble.hpp"
#include "cglab/error.hpp"

namespace cglab {
namespace {

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InputError("transport exponent p must be >= 1");
}

std::size_t point_count(std::span<const double> A, std::span<const double> B, std::size_t dim) {
  if (dim == 0) throw InputError("dimension must be positive");
  if (A.empty() || B.empty()) throw InputError("empty point set");
  if (A.size() % dim != 0 || B.size() % dim != 0) throw InputError("point data not a multiple of the dimension");
  if (A.size() != B.size()) throw InputError("point sets differ in size");
  return A.size() / dim;
}

std::vector<double> cost_matrix(std::span<const double> A, std::span<const double> B, std::size_t dim, double p) {
  const std::size_t n = A.size() / dim;
  std::vector<double> C(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double c = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = std::abs(A[i * dim + k] - B[j * dim + k]);
        c += p == 2.0 ? d * d : std::pow(d, p);
      }
      C[i * n + j] = c;
    }
  }
  return C;
}

double root(double power, double p) { return power <= 0.0 ? 0.0 : std::pow(power, 1.0 / p); }

}  // namespace

std::string_view to_string(TransportMethod method) {
  switch (method) {
    case TransportMethod::quantile: return "quantile";
    case TransportMethod::matching: return "matching";
    case TransportMethod::sinkhorn: return "sinkhorn";
  }
  return "quantile";
}

TransportMethod transport_method_from_string(std::string_view name) {
  if (name == "quantile") return TransportMethod::quantile;
  if (name == "matching") return TransportMethod::matching;
  if (name == "sinkhorn") return TransportMethod::sinkhorn;
  throw InputError("unknown transport method '" + std::string(name) + "'");
}

double WassersteinResult::power() const { return std::pow(value, p); }

WassersteinResult wasserstein_1d(std::span<const double> a_in, std::span<const double> b_in, double p) {
  check_p(p);
  if (a_in.empty() || b_in.empty()) throw InputError("empty sample");
  std::vector<double> a(a_in.begin(), a_in.end());
  std::vector<double> b(b_in.begin(), b_in.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  auto cost = [p](double d) { return p == 2.0 ? d * d : std::pow(std::abs(d), p); };

  double total = 0.0;
  if (a.size() == b.size()) {
    for (std::size_t i = 0; i < a.size(); ++i) total += cost(a[i] - b[i]);
    total /= static_cast<double>(a.size());
  } else {
    // Walk the merged quantile levels i/na and j/nb, integer arithmetic on na*nb.
    const std::size_t na = a.size(), nb = b.size();
    std::size_t i = 0, j = 0, level = 0;
    while (i < na && j < nb) {
      const std::size_t next_a = (i + 1) * nb;
      const std::size_t next_b = (j + 1) * na;
      const std::size_t next = std::min(next_a, next_b);
      total += static_cast<double>(next - level) * cost(a[i] - b[j]);
      level = next;
      if (next_a == next) ++i;
      if (next_b == next) ++j;
    }
    total /= static_cast<double>(na * nb);
  }
  WassersteinResult r;
  r.p = p;
  r.value = root(total, p);
  r.method = TransportMethod::quantile;
  r.n_points = std::max(a.size(), b.size());
  return r;
}

WassersteinResult wasserstein_matching(std::span<const double> A, std::span<const double> B, std::size_t dim,
                                       double p) {
  check_p(p);
  const std::size_t n = point_count(A, B, dim);
  if (n > 4096) throw InputError("matching supports at most 4096 points");
  const std::vector<double> C = cost_matrix(A, B, dim, p);

  // Shortest augmenting paths with row/column potentials; 1-based with a sentinel column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      const double* row = &C[(i0 - 1) * n];
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += C[(match[j] - 1) * n + (j - 1)];

  WassersteinResult r;
  r.p = p;
  r.value = root(total / static_cast<double>(n), p);
  r.method = TransportMethod::matching;
  r.n_points = n;
  return r;
}

double median_cost(std::span<const double> A, std::span<const double> B, std::size_t dim, double p) {
  check_p(p);
  point_count(A, B, dim);
  std::vector<double> C = cost_matrix(A, B, dim, p);
  auto mid = C.begin() + static_cast<std::ptrdiff_t>(C.size() / 2);
  std::nth_element(C.begin(), mid, C.end());
  return *mid;
}

WassersteinResult wasserstein_sinkhorn(std::span<const double> A, std::span<const double> B, std::size_t dim,
                                       double p, double epsilon, std::size_t max_iter) {
  check_p(p);
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  const std::size_t n = point_count(A, B, dim);
  const std::vector<double> C = cost_matrix(A, B, dim, p);
  const double log_w = -std::log(static_cast<double>(n));
  std::vector<double> f(n, 0.0), g(n, 0.0), buf(n);

  auto lse = [&](std::size_t count, auto term) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < count; ++k) {
      buf[k] = term(k);
      mx = std::max(mx, buf[k]);
    }
    double s = 0.0;
    for (std::size_t k = 0; k < count; ++k) s += std::exp(buf[k] - mx);
    return mx + std::log(s);
  };
  auto update = [&](double eps) {
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = eps * log_w - eps * lse(n, [&](std::size_t j) { return (g[j] - C[i * n + j]) / eps; });
    }
    for (std::size_t j = 0; j < n; ++j) {
      g[j] = eps * log_w - eps * lse(n, [&](std::size_t i) { return (f[i] - C[i * n + j]) / eps; });
    }
  };
  // Row-marginal L1 violation; columns are exact right after the g update.
  auto violation = [&](double eps) {
    double viol = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += std::exp((f[i] + g[j] - C[i * n + j]) / eps);
      viol += std::abs(row - 1.0 / static_cast<double>(n));
    }
    return viol;
  };

  // Newton step on the dual (f, g): solve H d = (a - P1, b - P^t 1) with
  // H = [diag(P1) P; P^t diag(P^t 1)] / eps, then backtrack on the total
  // marginal violation (dual objective differences drown in rounding here).
  auto total_violation = [&](const std::vector<double>& ff, const std::vector<double>& gg, double eps) {
    std::vector<double> col(n, 0.0);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double pij = std::exp((ff[i] + gg[j] - C[i * n + j]) / eps);
        row += pij;
        col[j] += pij;
      }
      v += std::abs(row - 1.0 / static_cast<double>(n));
    }
    for (double c : col) v += std::abs(c - 1.0 / static_cast<double>(n));
    return v;
  };
  auto newton = [&](double eps) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * n), static_cast<Eigen::Index>(2 * n));
    Eigen::VectorXd grad(static_cast<Eigen::Index>(2 * n));
    std::vector<double> col(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double pij = std::exp((f[i] + g[j] - C[i * n + j]) / eps);
        row += pij;
        col[j] += pij;
        H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n + j)) = pij / eps;
        H(static_cast<Eigen::Index>(n + j), static_cast<Eigen::Index>(i)) = pij / eps;
      }
      H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = row / eps;
      grad(static_cast<Eigen::Index>(i)) = 1.0 / static_cast<double>(n) - row;
    }
    for (std::size_t j = 0; j < n; ++j) {
      H(static_cast<Eigen::Index>(n + j), static_cast<Eigen::Index>(n + j)) = col[j] / eps;
      grad(static_cast<Eigen::Index>(n + j)) = 1.0 / static_cast<double>(n) - col[j];
    }
    // (1, -1) is always in the kernel; the shift keeps the solve definite.
    const double shift = 1e-10 * H.diagonal().maxCoeff();
    H.diagonal().array() += shift;
    const Eigen::VectorXd d = H.ldlt().solve(grad);
    const double base = grad.lpNorm<1>();
    std::vector<double> ft(n), gt(n);
    for (double step = 1.0; step > 1e-6; step *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) {
        ft[i] = f[i] + step * d(static_cast<Eigen::Index>(i));
        gt[i] = g[i] + step * d(static_cast<Eigen::Index>(n + i));
      }
      const double tv = total_violation(ft, gt, eps);
      if (tv < base) {
        f = ft;
        g = gt;
        return;
      }
    }
  };

  const double cmax = *std::max_element(C.begin(), C.end());
  double eps = std::max(epsilon, cmax);
  std::size_t iters = 0;
  while (eps > epsilon) {
    for (int k = 0; k < 10 && iters < max_iter; ++k, ++iters) update(eps);
    eps = std::max(epsilon, 0.5 * eps);
  }
  // Plain sweeps first; once they stall, Newton steps (each followed by a
  // sweep) finish the job. The dense 2n x 2n solve is only used up to n = 512.
  double viol = std::numeric_limits<double>::infinity();
  std::size_t sweeps = 0;
  while (iters < max_iter) {
    if (sweeps >= 1000 && n <= 512) newton(epsilon);
    update(epsilon);
    ++iters;
    ++sweeps;
    if (sweeps >= 1000 || iters % 10 == 0 || iters == max_iter) {
      viol = violation(epsilon);
      if (viol <= 1e-9) break;
    }
  }
  if (!(viol <= 1e-9)) {
    viol = violation(epsilon);
    if (!(viol <= 1e-9)) throw NonConvergenceError("sinkhorn did not reach the marginal tolerance", viol);
  }

  double transport = 0.0;
  double dual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      transport += std::exp((f[i] + g[j] - C[i * n + j]) / epsilon) * C[i * n + j];
    }
    dual += (f[i] + g[i]) / static_cast<double>(n);
  }
  WassersteinResult r;
  r.p = p;
  r.value = root(transport, p);
  r.method = TransportMethod::sinkhorn;
  r.epsilon = epsilon;
  r.dual_gap = transport - dual;
  r.n_points = n;
  r.iterations = iters;
  return r;
}

WassersteinResult wasserstein(const SampleBatch& a, const SampleBatch& b, double p, TransportMethod method,
                              double epsilon) {
  if (a.dim != b.dim) throw InputError("batches differ in dimension");
  switch (method) {
    case TransportMethod::quantile:
      if (a.dim != 1) throw InputError("quantile coupling needs one-dimensional samples");
      return wasserstein_1d(a.data, b.data, p);
    case TransportMethod::matching: return wasserstein_matching(a.data, b.data, a.dim, p);
    case TransportMethod::sinkhorn: return wasserstein_sinkhorn(a.data, b.data, a.dim, p, epsilon);
  }
  throw InputError("unknown transport method");
}

}  // namespace cglab
