#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "cglab/error.hpp"
#include "cglab/functional.hpp"

using namespace cglab;

namespace {

DiscretizedMeasure gaussian_1d(double sd, double step) {
  return DiscretizedMeasure::from_log_density_1d([sd](double x) { return -0.5 * x * x / (sd * sd); }, -8.0 * sd,
                                                 8.0 * sd, step);
}

SampleBatch batch_from(const std::vector<double>& v, std::size_t dim = 1) {
  SampleBatch b;
  b.dim = dim;
  b.n_samples = v.size() / dim;
  b.data = v;
  b.ess = static_cast<double>(b.n_samples);
  return b;
}

std::vector<double> normal_draws(std::size_t n, double mu, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(mu, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

}  // namespace

TEST_CASE("dual exponent") {
  CHECK(dual_exponent(2.0) == 2.0);
  CHECK(dual_exponent(4.0) == doctest::Approx(4.0 / 3.0));
  CHECK(dual_exponent(3.0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(dual_exponent(1.0), DomainError);
}

TEST_CASE("discretized measure validation") {
  DiscretizedMeasure m{1, {0.0, 1.0}, {0.5, 0.5}};
  m.validate();
  CHECK_THROWS_AS((DiscretizedMeasure{1, {0.0, 1.0}, {0.5, 0.6}}.validate()), InputError);
  CHECK_THROWS_AS((DiscretizedMeasure{1, {0.0, 1.0}, {1.5, -0.5}}.validate()), InputError);
  CHECK_THROWS_AS((DiscretizedMeasure{2, {0.0, 1.0}, {0.5, 0.5}}.validate()), InputError);
  const auto g = gaussian_1d(1.0, 0.01);
  double s = 0.0;
  for (double w : g.weights) s += w;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("entropy") {
  const DiscretizedMeasure two{1, {0.0, 1.0}, {0.5, 0.5}};
  const double e = std::numbers::e;
  CHECK(entropy(std::vector<double>{3.0, 3.0}, two) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(entropy(std::vector<double>{1.0, e}, two) == doctest::Approx(0.5 * e - (0.5 + 0.5 * e) * std::log(0.5 + 0.5 * e)));
  CHECK_THROWS_AS(entropy(std::vector<double>{1.0, 0.0}, two), DomainError);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  DiscretizedMeasure m{1, {}, {}};
  for (int i = 0; i < 20; ++i) {
    m.support.push_back(i);
    m.weights.push_back(u(rng));
  }
  double s = 0.0;
  for (double w : m.weights) s += w;
  for (double& w : m.weights) w /= s;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> f(20), g(20);
    for (std::size_t i = 0; i < 20; ++i) {
      f[i] = u(rng);
      g[i] = 7.0 * f[i];
    }
    const double ef = entropy(f, m);
    CHECK(ef >= 0.0);
    CHECK(entropy(g, m) == doctest::Approx(7.0 * ef));
  }
}

TEST_CASE("batch entropy matches the uniform discrete measure") {
  const auto x = normal_draws(2000, 0.0, 8);
  std::vector<double> f(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) f[i] = std::exp(0.5 * x[i]);
  DiscretizedMeasure m{1, x, std::vector<double>(x.size(), 1.0 / static_cast<double>(x.size()))};
  const auto est = entropy(f, batch_from(x));
  CHECK(est.value == doctest::Approx(entropy(f, m)).epsilon(1e-10));
  // closed form lambda^2/2 exp(lambda^2/2) at lambda = 0.5
  CHECK(std::abs(est.value - 0.125 * std::exp(0.125)) <= 4.0 * est.se);
}

TEST_CASE("mlsi energy") {
  const auto g = gaussian_1d(1.0, 0.01);
  std::vector<double> f(g.size()), grad(g.size()), ones(g.size(), 2.0), zeros(g.size(), 0.0);
  double direct = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.support[i];
    const double gx = std::sin(x), dg = std::cos(x);
    f[i] = std::exp(gx);
    grad[i] = dg * f[i];
    direct += g.weights[i] * dg * dg * f[i];
  }
  CHECK(mlsi_energy(ones, zeros, g, 2.0) == 0.0);
  CHECK(mlsi_energy(f, grad, g, 2.0) == doctest::Approx(direct).epsilon(1e-12));
  std::vector<double> f3(f), g3(grad);
  for (auto& v : f3) v *= 3.0;
  for (auto& v : g3) v *= 3.0;
  CHECK(mlsi_energy(f3, g3, g, 1.5) / entropy(f3, g) ==
        doctest::Approx(mlsi_energy(f, grad, g, 1.5) / entropy(f, g)).epsilon(1e-12));
  CHECK_THROWS_AS(mlsi_energy(f, grad, g, 2.5), InputError);
}

TEST_CASE("the two forms of the inequality agree: energy(f^q) = q^q int |grad f|^q") {
  const auto g = gaussian_1d(1.0, 0.01);
  for (double q : {1.25, 1.5, 2.0}) {
    std::vector<double> f(g.size()), fq(g.size()), gq(g.size());
    double rhs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.support[i];
      f[i] = 1.5 + std::tanh(x);
      const double df = 1.0 - std::tanh(x) * std::tanh(x);
      fq[i] = std::pow(f[i], q);
      gq[i] = q * std::pow(f[i], q - 1.0) * df;
      rhs += g.weights[i] * std::pow(std::abs(df), q);
    }
    CHECK(mlsi_energy(fq, gq, g, q) == doctest::Approx(std::pow(q, q) * rhs).epsilon(1e-12));
  }
}

TEST_CASE("estimate_best_rho") {
  SUBCASE("Gaussian tilts give 2, scaling as 1/variance") {
    const auto fam = coordinate_tilt_family(1);
    const auto r = estimate_best_rho(gaussian_1d(1.0, 1e-3), 2.0, fam);
    CHECK(r.rho_hat == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(r.q == 2.0);
    CHECK(r.family_id == fam.id);
    CHECK(r.n_functions == fam.members.size());
    const auto r2 = estimate_best_rho(gaussian_1d(0.5, 1e-3), 2.0, fam);
    CHECK(r2.rho_hat == doctest::Approx(8.0).epsilon(1e-3));
  }
  SUBCASE("adding members never increases the estimate") {
    const auto mu = DiscretizedMeasure::from_log_density_1d([](double x) { return -std::pow(x, 4); }, -4.0, 4.0, 0.005);
    auto fam = coordinate_tilt_family(1);
    const double before = estimate_best_rho(mu, 2.0, fam).rho_hat;
    const auto extra = default_tilt_family(1);
    fam.members.insert(fam.members.end(), extra.members.begin(), extra.members.end());
    const double after = estimate_best_rho(mu, 2.0, fam).rho_hat;
    CHECK(after <= before);
    CHECK(after > 0.0);
  }
  SUBCASE("p = 4: exp(-|x|^4) has a positive constant") {
    const auto mu = DiscretizedMeasure::from_log_density_1d([](double x) { return -std::pow(x, 4); }, -4.0, 4.0, 0.005);
    const auto r = estimate_best_rho(mu, 4.0, default_tilt_family(1));
    CHECK(r.q == doctest::Approx(4.0 / 3.0));
    CHECK(r.rho_hat > 0.0);
    CHECK_FALSE(r.argmin_id.empty());
  }
  SUBCASE("product measure is no better than its marginals") {
    const auto a = gaussian_1d(1.0, 0.02), b = gaussian_1d(0.5, 0.01);
    DiscretizedMeasure prod{2, {}, {}};
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        prod.support.push_back(a.support[i]);
        prod.support.push_back(b.support[j]);
        prod.weights.push_back(a.weights[i] * b.weights[j]);
      }
    }
    const auto fam = coordinate_tilt_family(2);
    const double r = estimate_best_rho(prod, 2.0, fam).rho_hat;
    const double ra = estimate_best_rho(a, 2.0, coordinate_tilt_family(1)).rho_hat;
    const double rb = estimate_best_rho(b, 2.0, coordinate_tilt_family(1)).rho_hat;
    CHECK(r <= std::min(ra, rb) * (1.0 + 1e-9));
  }
  SUBCASE("constants only: empty family") {
    FamilySpec fam{"constants", {}, false};
    fam.members.push_back({"one", [](std::span<const double>) { return 1.0; },
                           [](std::span<const double>, std::span<double> g) { g[0] = 0.0; }});
    CHECK_THROWS_AS(estimate_best_rho(gaussian_1d(1.0, 0.01), 2.0, fam), EmptyFamilyError);
  }
}

TEST_CASE("batch estimator agrees with the discrete estimator on the same points") {
  const auto x = normal_draws(4000, 0.0, 12);
  DiscretizedMeasure m{1, x, std::vector<double>(x.size(), 1.0 / 4000.0)};
  const auto fam = default_tilt_family(1);
  CHECK(estimate_best_rho(batch_from(x), 2.0, fam).rho_hat == doctest::Approx(estimate_best_rho(m, 2.0, fam).rho_hat));
}

TEST_CASE("constant calculators") {
  CHECK(bakry_emery(2.0, 2.0) == 1.0);
  CHECK(bakry_emery(3.0, 2.0) == 1.5);
  // p = 4: q = 4/3, (rho/q)^(1/3)
  CHECK(bakry_emery(1.0, 4.0) == doctest::Approx(std::cbrt(0.75)));
  CHECK_THROWS_AS(bakry_emery(0.0, 2.0), DomainError);
  CHECK(tensorize(1.0, 2.0) == 1.0);
  CHECK(tensorize(3.0, 0.5) == 0.5);
  const auto hs = holley_stroock(2.0, 0.0);
  CHECK(hs.value == 2.0);
  CHECK(hs.literal == 2.0);
  const auto hs1 = holley_stroock(2.0, 0.5);
  CHECK(hs1.value == doctest::Approx(2.0 / std::numbers::e));
  CHECK(hs1.literal == doctest::Approx(2.0 * std::numbers::e));
  CHECK_THROWS_AS(holley_stroock(2.0, -1.0), DomainError);
  CHECK(herbst_concentration_constant(2.0, 2.0) == 1.0);
}

TEST_CASE("Laplace bound") {
  const auto g = DiscretizedMeasure::from_log_density_1d([](double x) { return -0.5 * x * x; }, -12.0, 12.0, 1e-3);
  std::vector<double> lambdas;
  for (int i = 0; i <= 30; ++i) lambdas.push_back(0.1 * i);
  const auto r = laplace_bound_check(g, [](double x) { return x; }, 2.0, 2.0, lambdas);
  CHECK(r.pass);
  CHECK(std::abs(r.rows.front().margin) <= 1e-14);
  for (const auto& row : r.rows) CHECK(std::abs(row.margin) <= 1e-8);

  const auto box = DiscretizedMeasure::from_log_density_1d([](double) { return 0.0; }, -1.0, 1.0, 1e-3);
  const auto bad = laplace_bound_check(box, [](double x) { return x; }, 50.0, 2.0, lambdas);
  CHECK_FALSE(bad.pass);
  CHECK(bad.worst_margin < 0.0);
  CHECK_THROWS_AS(laplace_bound_check(g, [](double x) { return 2.0 * x; }, 2.0, 2.0, lambdas), InputError);
}

TEST_CASE("concentration of Gaussian samples") {
  const auto x = normal_draws(50000, 0.0, 31);
  const std::vector<double> rs{0.0, 0.5, 1.0, 1.5, 2.0, 3.0};
  const auto r = concentration_check(batch_from(x), [](std::span<const double> v) { return v[0]; }, 1.0, 2.0, rs);
  CHECK(r.pass);
  CHECK(r.rows[0].bound == 1.0);
  for (const auto& row : r.rows) {
    CHECK(row.ci_lo <= row.empirical);
    CHECK(row.empirical <= row.ci_hi);
  }
  // An overstated constant is caught.
  CHECK_FALSE(concentration_check(batch_from(x), [](std::span<const double> v) { return v[0]; }, 8.0, 2.0, rs).pass);
}

TEST_CASE("Talagrand") {
  const auto mu = normal_draws(5000, 0.0, 1);
  const auto r0 = talagrand_check(batch_from(mu), batch_from(mu), [](std::span<const double>) { return 0.0; }, 2.0, 1.0, 50, 3);
  CHECK(r0.wpp == 0.0);
  CHECK(r0.entropy == 0.0);
  CHECK(r0.pass);

  const double a = 1.0;
  const auto nu = normal_draws(5000, a, 2);
  auto ratio = [a](std::span<const double> v) { return a * v[0] - 0.5 * a * a; };
  const auto r = talagrand_check(batch_from(mu), batch_from(nu), ratio, 2.0, 1.0, 100, 3);
  CHECK(std::abs(r.wpp - a * a) <= 4.0 * r.wpp_se + 0.02);
  CHECK(std::abs(r.entropy - 0.5 * a * a) <= 4.0 * r.entropy_se);
  CHECK(r.bound == doctest::Approx(2.0 * r.entropy));
  CHECK(r.pass);
  // Twice the sharp constant cannot hold.
  CHECK_FALSE(talagrand_check(batch_from(mu), batch_from(nu), ratio, 2.0, 2.0, 100, 3).pass);
}

TEST_CASE("entropy decomposition is exact on random tables") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    DiscretizedMeasure joint{2, {}, {}};
    std::vector<std::size_t> part;
    std::vector<double> f;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        joint.support.push_back(i);
        joint.support.push_back(j);
        joint.weights.push_back(u(rng));
        part.push_back(static_cast<std::size_t>(i));
        f.push_back(u(rng));
      }
    }
    double s = 0.0;
    for (double w : joint.weights) s += w;
    for (double& w : joint.weights) w /= s;
    const auto r = entropy_decomposition_check(joint, part, f);
    CHECK(std::abs(r.residual) <= 1e-12);
    CHECK(r.total == doctest::Approx(r.coarse + r.conditional));

    const auto one = entropy_decomposition_check(joint, std::vector<std::size_t>(36, 0), f);
    CHECK(std::abs(one.coarse) <= 1e-15);
  }
  DiscretizedMeasure small{1, {0.0, 1.0}, {0.5, 0.5}};
  CHECK_THROWS_AS(entropy_decomposition_check(small, std::vector<std::size_t>{0, 2}, std::vector<double>{1.0, 2.0}),
                  PartitionError);
}
