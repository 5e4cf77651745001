#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <doctest.h>

#include "cglab/ensemble.hpp"
#include "cglab/error.hpp"
#include "cglab/transport.hpp"

using namespace cglab;

namespace {

std::vector<double> draws(std::size_t n, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(shift, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

double lp_cost(const double* a, const double* b, std::size_t dim, double p) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) s += std::pow(std::abs(a[k] - b[k]), p);
  return s;
}

// Minimum over all permutations.
double brute_force_power(const std::vector<double>& A, const std::vector<double>& B, std::size_t dim, double p) {
  const std::size_t n = A.size() / dim;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += lp_cost(&A[i * dim], &B[perm[i] * dim], dim, p);
    best = std::min(best, s / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("method names") {
  for (auto m : {TransportMethod::quantile, TransportMethod::matching, TransportMethod::sinkhorn}) {
    CHECK(transport_method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(transport_method_from_string("simplex"), InputError);
}

TEST_CASE("one-dimensional closed forms") {
  const std::vector<double> a{1.0, 0.0}, b{3.0, 2.0};
  CHECK(wasserstein_1d(a, b, 2.0).value == doctest::Approx(2.0));
  CHECK(wasserstein_1d(a, b, 1.0).value == doctest::Approx(2.0));
  CHECK(wasserstein_1d(a, b, 2.0).power() == doctest::Approx(4.0));
  CHECK(wasserstein_1d(a, a, 3.0).value == 0.0);
  // unequal sizes: half the mass stays, half moves by 2
  CHECK(wasserstein_1d(std::vector<double>{0.0}, std::vector<double>{0.0, 2.0}, 1.0).value == doctest::Approx(1.0));
  CHECK(wasserstein_1d(std::vector<double>{0.0}, std::vector<double>{0.0, 2.0}, 2.0).value ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(wasserstein_1d(a, std::vector<double>{}, 2.0), InputError);
  CHECK_THROWS_AS(wasserstein_1d(a, b, 0.5), InputError);
}

TEST_CASE("matching equals the quantile coupling in 1D") {
  const auto a = draws(256, 1), b = draws(256, 2, 0.7);
  for (double p : {1.0, 2.0, 3.0}) {
    const auto q = wasserstein_1d(a, b, p);
    const auto m = wasserstein_matching(a, b, 1, p);
    CHECK(std::abs(q.value - m.value) <= 1e-12);
    CHECK(m.method == TransportMethod::matching);
    CHECK(m.n_points == 256);
  }
}

TEST_CASE("matching against brute force over permutations") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const auto A = draws(16, seed), B = draws(16, seed + 10, 0.3);
    for (double p : {1.0, 2.0, 4.0}) {
      CHECK(wasserstein_matching(A, B, 2, p).power() == doctest::Approx(brute_force_power(A, B, 2, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("translation costs exactly |v|_p^p") {
  const auto A = draws(300, 8);
  std::vector<double> B(A);
  for (std::size_t i = 0; i < B.size(); i += 3) {
    B[i] += 0.5;
    B[i + 1] -= 0.25;
    B[i + 2] += 1.0;
  }
  for (double p : {2.0, 3.0}) {
    const double expected = std::pow(0.5, p) + std::pow(0.25, p) + 1.0;
    CHECK(wasserstein_matching(A, B, 3, p).power() == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(wasserstein_matching(A, A, 3, 2.0).value == 0.0);
}

TEST_CASE("triangle inequality") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto A = draws(60, seed), B = draws(60, seed + 100, 0.5), C = draws(60, seed + 200, -0.4);
    for (double p : {1.0, 2.0}) {
      const double ab = wasserstein_matching(A, B, 2, p).value;
      const double bc = wasserstein_matching(B, C, 2, p).value;
      const double ac = wasserstein_matching(A, C, 2, p).value;
      CHECK(ac <= ab + bc + 1e-12);
    }
  }
}

TEST_CASE("Sinkhorn approaches the exact value from above") {
  const auto A = draws(128, 11), B = draws(128, 12, 0.6);
  const double exact = wasserstein_matching(A, B, 2, 2.0).power();
  const double unit = median_cost(A, B, 2, 2.0);
  CHECK(unit > 0.0);
  double prev = INFINITY;
  for (double scale : {1e-1, 1e-2, 1e-3}) {
    const auto s = wasserstein_sinkhorn(A, B, 2, 2.0, scale * unit);
    CHECK(s.method == TransportMethod::sinkhorn);
    CHECK(s.epsilon == doctest::Approx(scale * unit));
    CHECK(s.power() >= exact - 1e-9);
    CHECK(s.power() <= prev + 1e-9);
    CHECK(s.dual_gap >= -1e-8);
    prev = s.power();
  }
  CHECK(std::abs(prev - exact) / exact <= 0.01);
  CHECK_THROWS_AS(wasserstein_sinkhorn(A, B, 2, 2.0, 0.0), InputError);
  CHECK_THROWS_AS(wasserstein_sinkhorn(A, B, 2, 2.0, 1e-4 * unit, 3), NonConvergenceError);
}

TEST_CASE("batch dispatch") {
  SampleBatch a, b;
  a.dim = b.dim = 1;
  a.data = draws(200, 1);
  b.data = draws(200, 2);
  a.n_samples = b.n_samples = 200;
  CHECK(wasserstein(a, b, 2.0, TransportMethod::quantile).value ==
        doctest::Approx(wasserstein(a, b, 2.0, TransportMethod::matching).value).epsilon(1e-12));
  SampleBatch c;
  c.dim = 2;
  c.data = draws(200, 3);
  c.n_samples = 100;
  CHECK_THROWS_AS(wasserstein(a, c, 2.0, TransportMethod::matching), InputError);
  CHECK_THROWS_AS(wasserstein(c, c, 2.0, TransportMethod::quantile), InputError);
  CHECK_THROWS_AS(wasserstein(a, b, 2.0, TransportMethod::sinkhorn, 0.0), InputError);
}

TEST_CASE("small closed forms and homogeneity") {
  const std::vector<double> A{0.0, 0.0, 1.0, 1.0}, B{1.0, 0.0, 0.0, 1.0};
  CHECK(wasserstein_matching(A, B, 2, 2.0).power() == doctest::Approx(1.0));
  const std::vector<double> x{0.5, -1.0, 2.0}, y{1.5, 1.0, 1.0};
  // singleton batches: W_p = |x - y|_p
  CHECK(wasserstein_matching(x, y, 3, 3.0).value == doctest::Approx(std::cbrt(1.0 + 8.0 + 1.0)));
  const auto P = draws(40, 1), Q = draws(40, 2, 1.0);
  std::vector<double> P3(P), Q3(Q);
  for (auto& v : P3) v *= 3.0;
  for (auto& v : Q3) v *= 3.0;
  CHECK(wasserstein_matching(P3, Q3, 2, 2.0).value == doctest::Approx(3.0 * wasserstein_matching(P, Q, 2, 2.0).value));
  std::vector<double> R(P);
  std::swap(R[0], R[38]);
  std::swap(R[1], R[39]);
  CHECK(wasserstein_matching(P, R, 2, 2.0).value == 0.0);
}
