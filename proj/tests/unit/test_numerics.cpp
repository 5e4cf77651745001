#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "cglab/error.hpp"
#include "cglab/grid.hpp"
#include "cglab/quadrature.hpp"
#include "cglab/spline.hpp"
#include "oracles.hpp"

using namespace cglab;

TEST_CASE("grid nodes, steps and trimming") {
  const UniformGrid g(-1.0, 1.0, 21);
  CHECK(g.step() == doctest::Approx(0.1));
  CHECK(g.node(0) == -1.0);
  CHECK(g.node(20) == 1.0);
  const UniformGrid s = g.shrunk(0.25);
  CHECK(s.n_nodes == 15);
  CHECK(s.min == doctest::Approx(-0.7));
  CHECK_THROWS_AS(g.shrunk(1.0), InsufficientGridError);
  CHECK_THROWS_AS(UniformGrid(1.0, 0.0, 5), InputError);
  CHECK(UniformGrid::with_step(-3.0, 3.0, 0.01).n_nodes == 601);
}

TEST_CASE("spline reproduces cubics and their derivatives") {
  const UniformGrid g(-2.0, 3.0, 26);
  std::vector<double> v;
  auto f = [](double x) { return 0.3 * x * x * x - x * x + 2.0 * x - 1.0; };
  for (double x : g.nodes()) v.push_back(f(x));
  const CubicSpline s(g, v);
  for (double x : {-1.93, -0.51, 0.0, 0.77, 2.99}) {
    CHECK(s.eval(x, 0) == doctest::Approx(f(x)).epsilon(1e-12));
    CHECK(s.eval(x, 1) == doctest::Approx(0.9 * x * x - 2.0 * x + 2.0).epsilon(1e-10));
    CHECK(s.eval(x, 2) == doctest::Approx(1.8 * x - 2.0).epsilon(1e-9));
  }
}

TEST_CASE("Gauss-Kronrod and Simpson agree with closed forms") {
  auto f = [](double x) { return std::array<double, 1>{std::exp(-x * x)}; };
  const double bp[] = {-8.0, 0.0, 8.0};
  const auto gk = integrate_gauss_kronrod<1>(f, bp, 1e-12, 512);
  CHECK(gk.converged);
  CHECK(gk.value[0] == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  const auto si = integrate_simpson<1>(f, -8.0, 8.0, 1e-12, 512);
  CHECK(si.converged);
  CHECK(si.value[0] == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-11));
}

TEST_CASE("log_integrate survives magnitudes far outside double range") {
  // exp(2000 - x^2/2): the shift keeps the sum representable.
  auto logf = [](double x) { return 2000.0 - 0.5 * x * x; };
  const double got = log_integrate(logf, -40.0, 40.0, QuadratureSpec{}, 0.0);
  CHECK(got == doctest::Approx(2000.0 + oracle::half_log_two_pi()).epsilon(1e-14));

  QuadratureSpec simpson;
  simpson.rule = QuadratureRule::simpson;
  CHECK(log_integrate(logf, -40.0, 40.0, simpson, 0.0) == doctest::Approx(got).epsilon(1e-13));
}

TEST_CASE("mass location finds an off-center bimodal peak and rejects clipped tails") {
  auto logf = [](double x) { return -(x * x - 4.0) * (x * x - 4.0) + 0.5 * x; };
  const MassWindow w = locate_mass(logf, -10.0, 10.0);
  CHECK(w.peak == doctest::Approx(2.0156).epsilon(1e-3));
  CHECK(w.lo < -2.5);
  CHECK(w.hi > 2.5);
  const double ref = oracle::log_trapezoid(logf, -4.0, 4.0, 400000);
  CHECK(log_integrate(logf, w, QuadratureSpec{}, 0.0) == doctest::Approx(ref).epsilon(1e-9));

  auto flat = [](double x) { return -0.01 * x * x; };
  CHECK_THROWS_AS(locate_mass(flat, -5.0, 5.0), DomainError);
}

TEST_CASE("density moments of a shifted Gaussian") {
  auto logf = [](double x) { return -0.5 * (x - 1.5) * (x - 1.5) / 0.25; };
  const auto w = locate_mass(logf, -10.0, 10.0);
  const auto dm = density_moments(logf, w, QuadratureSpec{}, 0.0);
  CHECK(dm.mean == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(dm.variance == doctest::Approx(0.25).epsilon(1e-11));
  CHECK(std::abs(dm.third) < 1e-12);
  CHECK(dm.fourth == doctest::Approx(3.0 * 0.0625).epsilon(1e-10));
}

TEST_CASE("quadrature spec validation") {
  QuadratureSpec q;
  q.max_subdivisions = 10;
  CHECK_THROWS_AS(q.validate(), InputError);
  q = QuadratureSpec{};
  q.rel_tol = 0.0;
  CHECK_THROWS_AS(q.validate(), InputError);
}
