// Acceptance gate: `acceptance <criterion>` runs one criterion and prints a
// single PASS/FAIL line; `acceptance all` runs every criterion in turn.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cglab/cramer.hpp"
#include "cglab/ensemble.hpp"
#include "cglab/functional.hpp"
#include "cglab/kawasaki.hpp"
#include "cglab/renorm.hpp"
#include "cglab/transport.hpp"

using namespace cglab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_dev_from_half_square(const TabulatedPotential& t, double lo, double hi) {
  double d = 0.0;
  for (std::size_t i = 0; i < t.grid().n_nodes; ++i) {
    const double y = t.grid().node(i);
    if (y >= lo && y <= hi) d = std::max(d, std::abs(t.values()[i] - 0.5 * y * y));
  }
  return d;
}

Outcome gaussian_fixed_point() {
  const auto g = PotentialSpec::gaussian();
  Outcome o{true, ""};
  for (int M = 1; M <= 5; ++M) {
    const double dev = max_dev_from_half_square(coarse_potential(g, 1 << M, 3.0, 0.01), -3.0, 3.0);
    o.pass = o.pass && dev <= 1e-6;
    o.detail += fmt("R^%d dev %.2e; ", M, dev);
  }
  o.detail += "bound 1e-6";
  return o;
}

Outcome r2_vs_psi4() {
  const auto dw = make_double_well();
  const auto r2 = coarse_potential(dw, 4, 1.5, 0.02);
  const auto d4 = coarse_grained_direct(dw.with_halfwidth(8.0), 4, UniformGrid::with_step(-1.5, 1.5, 0.05));
  const std::size_t n = d4.grid().n_nodes;
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) shift += r2.eval(d4.grid().node(i), 0) - d4.values()[i];
  shift /= static_cast<double>(n);
  double dev = 0.0;
  for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(r2.eval(d4.grid().node(i), 0) - d4.values()[i] - shift));
  return {dev <= 1e-5, fmt("max |R^2 psi - psi_4 - const| = %.2e on %zu nodes, bound 1e-5", dev, n)};
}

Outcome cramer_trend() {
  const auto psi = PotentialSpec::quadratic_plus_cosine(1.0, 0.5).with_halfwidth(12.0);
  const auto m_grid = UniformGrid::with_step(-2.0, 2.0, 0.05);
  std::vector<double> d;
  Outcome o{true, ""};
  for (int K : {2, 4, 8, 16}) {
    d.push_back(cramer_deficit(psi, coarse_potential(psi, K, 2.0, 0.01), m_grid).max_deficit);
    o.detail += fmt("K=%d deficit %.4g; ", K, d.back());
  }
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    const double ratio = d[i] / d[i + 1];
    o.pass = o.pass && d[i + 1] < d[i];
    if (i >= 1) o.pass = o.pass && ratio >= 1.3 && ratio <= 3.0;
    o.detail += fmt("ratio %d/%d = %.3f; ", 2 << i, 4 << i, ratio);
  }
  o.detail += "ratios for K >= 4 must lie in [1.3, 3]";
  return o;
}

Outcome convexification() {
  const auto dw = make_double_well();
  std::vector<double> c;
  Outcome o{true, ""};
  for (int M = 1; M <= 6; ++M) {
    c.push_back(certify_p_convexity(coarse_potential(dw, 1 << M, 2.0, 0.01), 4.0, 20000, 1).c_uniform);
    o.detail += fmt("M=%d c=%.4g; ", M, c.back());
  }
  int m0 = 0;
  for (int M = 6; M >= 1 && c[static_cast<std::size_t>(M - 1)] > 0.0; --M) m0 = M;
  o.pass = m0 >= 1;
  for (int M = std::max(m0, 1); m0 >= 1 && M < 6; ++M) {
    o.pass = o.pass && c[static_cast<std::size_t>(M)] >= 0.9 * c[static_cast<std::size_t>(M - 1)];
  }
  // Cross-check: psi_K'' tends to phi'', so c_uniform should approach inf phi''.
  const auto wide = dw.with_halfwidth(10.0);
  double inf_phi_dd = INFINITY;
  for (double m = -2.0; m <= 2.0 + 1e-9; m += 0.05) inf_phi_dd = std::min(inf_phi_dd, phi_dd(wide, m));
  o.detail += fmt("M0 = %d; inf phi'' on [-2,2] = %.4g", m0, inf_phi_dd);
  return o;
}

Outcome p_growth() {
  const auto psi = PotentialSpec::quadratic_plus_power(1.0, 1.0, 4.0).with_halfwidth(6.0);
  const auto r = check_p_growth(psi, 4.0, UniformGrid::with_step(-3.0, 3.0, 0.05));
  return {r.pass && r.c_phi_growth > 0.0 && r.c_phidd_growth > 0.0,
          fmt("m0 = %.3g, c = %.4g, C = %.4g, c' = %.4g", r.m0, r.c_phi_growth, r.c_phidd_growth, r.c_dphi_growth)};
}

Outcome gradient_identity() {
  const CanonicalEnsemble e{4, 0.1, make_double_well()};
  const std::vector<double> y{0.3, -0.1};
  const std::vector<TestFunction> fs{
      {"exp-linear",
       [](std::span<const double> x) { return std::exp(0.4 * x[0] - 0.3 * x[1] + 0.2 * x[2] + 0.5 * x[3]); },
       [](std::span<const double> x, std::span<double> g) {
         const double v = std::exp(0.4 * x[0] - 0.3 * x[1] + 0.2 * x[2] + 0.5 * x[3]);
         g[0] = 0.4 * v;
         g[1] = -0.3 * v;
         g[2] = 0.2 * v;
         g[3] = 0.5 * v;
       }},
      {"trig", [](std::span<const double> x) { return 2.0 + std::sin(x[0]) * std::cos(x[2]); },
       [](std::span<const double> x, std::span<double> g) {
         g[0] = std::cos(x[0]) * std::cos(x[2]);
         g[1] = 0.0;
         g[2] = -std::sin(x[0]) * std::sin(x[2]);
         g[3] = 0.0;
       }},
      {"softplus", [](std::span<const double> x) { return 0.5 + std::log1p(std::exp(x[0] + x[1] - x[3])); },
       [](std::span<const double> x, std::span<double> g) {
         const double s = 1.0 / (1.0 + std::exp(-(x[0] + x[1] - x[3])));
         g[0] = s;
         g[1] = s;
         g[2] = 0.0;
         g[3] = -s;
       }}};
  Outcome o{true, ""};
  std::uint64_t seed = 1;
  for (const auto& f : fs) {
    const auto r = check_gradient_identity(e, f, y, 100000, seed++);
    o.pass = o.pass && r.pass && !r.inconclusive;
    o.detail += f.name + ":";
    for (std::size_t b = 0; b < r.residual.size(); ++b) {
      o.detail += fmt(" %.2g/%.2g", r.residual[b] / r.se[b], r.residual_plus[b] / r.se_plus[b]);
    }
    o.detail += "; ";
  }
  o.detail += "entries are residual/SE for the derived (minus) sign / the plus sign, n = 1e5";
  return o;
}

Outcome entropy_decomposition() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.01, 4.0);
  std::uniform_int_distribution<int> size(2, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = size(rng), cols = size(rng);
    DiscretizedMeasure joint{2, {}, {}};
    std::vector<std::size_t> part;
    std::vector<double> f;
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        joint.support.push_back(i);
        joint.support.push_back(j);
        joint.weights.push_back(u(rng));
        part.push_back(static_cast<std::size_t>(i));
        f.push_back(u(rng));
      }
    }
    const double s = std::accumulate(joint.weights.begin(), joint.weights.end(), 0.0);
    for (double& w : joint.weights) w /= s;
    worst = std::max(worst, std::abs(entropy_decomposition_check(joint, part, f).residual));
  }
  return {worst <= 1e-12, fmt("worst residual %.2e over 50 random tables, bound 1e-12", worst)};
}

Outcome appendix_formulas() {
  Outcome o{true, ""};
  const double be = bakry_emery(2.0, 2.0);
  o.pass = o.pass && be == 1.0;
  bool tens = true;
  for (double a : {0.1, 1.0, 2.5})
    for (double b : {0.3, 1.0, 4.0}) tens = tens && tensorize(a, b) == std::min(a, b);
  bool hs = true;
  for (double r : {0.5, 1.0, 2.0}) hs = hs && holley_stroock(r, 0.0).value == r;
  o.pass = o.pass && tens && hs;
  const auto mu = DiscretizedMeasure::from_log_density_1d([](double x) { return -0.5 * x * x; }, -12.0, 12.0, 1e-3);
  std::vector<double> lambdas;
  for (int i = 0; i <= 30; ++i) lambdas.push_back(0.1 * i);
  const auto lap = laplace_bound_check(mu, [](double x) { return x; }, 2.0, 2.0, lambdas);
  double worst = 0.0;
  for (const auto& row : lap.rows) worst = std::max(worst, std::abs(row.margin));
  o.pass = o.pass && worst <= 1e-8;
  o.detail = fmt("bakry_emery(2,2) = %g; tensorize min %s; holley_stroock(rho,0) = rho %s; Herbst max |margin| %.2e",
                 be, tens ? "ok" : "FAILED", hs ? "ok" : "FAILED", worst);
  return o;
}

Outcome mlsi_estimator() {
  const auto mu = DiscretizedMeasure::from_log_density_1d([](double x) { return -0.5 * x * x; }, -8.0, 8.0, 1e-3);
  const auto tilts = estimate_best_rho(mu, 2.0, coordinate_tilt_family(1));
  const auto full = estimate_best_rho(mu, 2.0, default_tilt_family(1));
  const bool ok = tilts.rho_hat >= 1.9 && tilts.rho_hat <= 2.1 && full.rho_hat >= 1.9 && full.rho_hat <= 2.1;
  return {ok, fmt("exponential tilts: rho_hat = %.6f (%s); default family: rho_hat = %.6f (%s)", tilts.rho_hat,
                  tilts.argmin_id.c_str(), full.rho_hat, full.argmin_id.c_str())};
}

std::vector<double> normal_draws(std::size_t n, double mean, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(mean, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

SampleBatch batch_of(std::vector<double> v, std::size_t dim) {
  SampleBatch b;
  b.dim = dim;
  b.n_samples = v.size() / dim;
  b.data = std::move(v);
  b.ess = static_cast<double>(b.n_samples);
  return b;
}

Outcome transport_oracles() {
  const auto a = normal_draws(256, 0.0, 1), b = normal_draws(256, 0.5, 2);
  const double gap1 = std::abs(wasserstein_matching(a, b, 1, 2.0).value - wasserstein_1d(a, b, 2.0).value);
  const auto A = normal_draws(128, 0.0, 3), B = normal_draws(128, 0.7, 4);
  const double exact = wasserstein_matching(A, B, 2, 2.0).value;
  const double eps = 1e-3 * median_cost(A, B, 2, 2.0);
  const auto s = wasserstein_sinkhorn(A, B, 2, 2.0, eps);
  const double rel = std::abs(s.value - exact) / exact;
  return {gap1 <= 1e-12 && rel <= 0.01,
          fmt("1D matching vs quantile |gap| = %.2e (n=256, bound 1e-12); sinkhorn vs matching relative gap %.2e "
              "(n=64, d=2, eps=%.3g, %zu iterations, bound 1e-2)",
              gap1, rel, eps, s.iterations)};
}

Outcome talagrand_closed_form() {
  Outcome o{true, ""};
  std::string info;
  std::uint64_t seed = 10;
  for (double a : {0.5, 1.0, 2.0}) {
    const auto mu = batch_of(normal_draws(10000, 0.0, seed++), 1);
    const auto nu = batch_of(normal_draws(10000, a, seed++), 1);
    auto ratio = [a](std::span<const double> x) { return a * x[0] - 0.5 * a * a; };
    const auto r = talagrand_check(mu, nu, ratio, 2.0, 2.0, 200, seed);
    const bool w_ok = std::abs(r.wpp - a * a) <= 3.0 * r.wpp_se;
    o.pass = o.pass && w_ok && r.pass;
    o.detail += fmt("a=%g: W2^2 %.4f vs %.4f (se %.3g, %s), margin %.4f (se %.3g, %s); ", a, r.wpp, a * a, r.wpp_se,
                    w_ok ? "ok" : "off", r.margin, r.margin_se, r.pass ? "ok" : "below -3 se");
    const auto sharp = talagrand_check(mu, nu, ratio, 2.0, 1.0, 200, seed);
    info += fmt(" a=%g margin %.4f (se %.3g)", a, sharp.margin, sharp.margin_se);
  }
  o.detail += "rho_tilde = 2 as specified; [info] rho_tilde = 1:" + info;
  return o;
}

SampleBatch shifted(const SampleBatch& b, double amplitude) {
  SampleBatch s = b;
  for (std::size_t i = 0; i < s.n_samples; ++i) {
    for (std::size_t j = 0; j < s.dim; ++j) s.data[i * s.dim + j] += (j < s.dim / 2 ? amplitude : -amplitude);
  }
  return s;
}

Outcome kawasaki() {
  Outcome o{true, ""};
  const auto dw = make_double_well();

  // (a) mean conservation over 1e5 steps, N = 8
  {
    const CanonicalEnsemble e{8, 0.25, dw};
    KawasakiConfig c;
    c.N = 8;
    c.h = 0.002;
    c.T = 200.0;
    c.n_paths = 8;
    c.n_checkpoints = 2;
    c.seed = 1;
    c.threads = 4;
    const auto run = simulate(e, c);
    const bool ok = run.steps == 100000 && run.final_mean_error <= 1e-8;
    o.pass = o.pass && ok;
    o.detail += fmt("(a) %zu steps, mean error %.2e, per-step drift %.2e %s; ", run.steps, run.final_mean_error,
                    run.max_step_drift, ok ? "ok" : "FAILED");
  }

  // (b) equilibrium invariance at N = 4 over T = 10
  {
    const CanonicalEnsemble e{4, 0.0, dw};
    const std::size_t n = 4000;
    const auto eq = sample_canonical(e, {n, 1.0, 2000, 10, 7});
    KawasakiConfig c;
    c.N = 4;
    c.h = 0.002;
    c.T = 10.0;
    c.n_paths = n;
    c.n_checkpoints = 2;
    c.initial_law = InitialLaw::equilibrium;
    c.initial_batch = eq;
    c.seed = 2;
    c.threads = 4;
    const auto run = simulate(e, c);
    double worst = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      for (int k = 1; k <= 2; ++k) {
        auto moments = [&](const SampleBatch& b, double ess) {
          double s = 0.0, ss = 0.0;
          for (std::size_t i = 0; i < b.n_samples; ++i) {
            const double v = std::pow(b.data[i * 4 + j], k);
            s += v;
            ss += v * v;
          }
          const double m = s / static_cast<double>(b.n_samples);
          const double var = ss / static_cast<double>(b.n_samples) - m * m;
          return std::pair{m, var / ess};
        };
        const auto [m0, v0] = moments(run.batches.front(), std::max(1.0, eq.ess));
        const auto [m1, v1] = moments(run.batches.back(), static_cast<double>(n));
        worst = std::max(worst, std::abs(m1 - m0) / std::sqrt(v0 + v1));
      }
    }
    const bool ok = worst <= 3.0;
    o.pass = o.pass && ok;
    o.detail += fmt("(b) worst per-site moment shift %.2f SE (ess %.0f) %s; ", worst, eq.ess, ok ? "ok" : "FAILED");
  }

  // (c) exponential W2 decay for the double-well, N = 4, shifted point-mass start
  {
    const CanonicalEnsemble e{4, 0.0, dw};
    const std::size_t n = 512;
    const auto ref = sample_canonical(e, {n, 1.0, 2000, 10, 11});
    const auto floor_ref = sample_canonical(e, {n, 1.0, 2000, 10, 12});
    KawasakiConfig c;
    c.N = 4;
    c.h = 0.002;
    c.T = 2.0;
    c.n_paths = n;
    c.n_checkpoints = 21;
    c.shift_amplitude = 1.5;
    c.seed = 3;
    c.threads = 4;
    const auto tr = decay_experiment(e, c, 2.0, TransportMethod::matching, ref, floor_ref);
    const bool ok = !tr.inconclusive && tr.fit_r2 >= 0.9;
    o.pass = o.pass && ok;
    o.detail += fmt("(c) fit_r2 %.4f over %zu points, rate %.3g %s; ", tr.fit_r2, tr.fit_points, tr.fitted_rate,
                    ok ? "ok" : "FAILED");
  }

  // (d) N = 2 Gaussian: W2^2 decays like exp(-2 lambda t), lambda = 4
  {
    const CanonicalEnsemble e{2, 0.0, PotentialSpec::gaussian()};
    const std::size_t n = 1024;
    const auto start = sample_canonical(e, {n, 1.0, 1000, 10, 21});
    const auto ref = sample_canonical(e, {n, 1.0, 1000, 10, 22});
    const auto floor_ref = sample_canonical(e, {n, 1.0, 1000, 10, 23});
    KawasakiConfig c;
    c.N = 2;
    c.h = 0.002;
    c.T = 1.0;
    c.n_paths = n;
    c.n_checkpoints = 11;
    c.initial_law = InitialLaw::equilibrium;
    c.initial_batch = shifted(start, 2.0);
    c.seed = 4;
    c.threads = 4;
    const auto tr = decay_experiment(e, c, 2.0, TransportMethod::matching, ref, floor_ref);
    const double target = 8.0;
    const bool ok = !tr.inconclusive && std::abs(tr.fitted_rate - target) <= 0.2 * target;
    o.pass = o.pass && ok;
    o.detail += fmt("(d) fitted rate %.3f vs 2 lambda = %.0f (r2 %.4f, %zu points) %s", tr.fitted_rate, target,
                    tr.fit_r2, tr.fit_points, ok ? "ok" : "FAILED");
  }
  return o;
}

Outcome dimension_proxy() {
  const auto dw = make_double_well();
  std::vector<double> rho, rho_coord;
  Outcome o{true, ""};
  for (int N : {2, 4, 8}) {
    const CanonicalEnsemble e{N, 0.0, dw};
    const auto batch = sample_canonical(e, {20000, 1.0, 2000, 5, static_cast<std::uint64_t>(100 + N)});
    auto fam = default_tilt_family(static_cast<std::size_t>(N));
    fam.tangential = true;
    const auto est = estimate_best_rho(batch, 2.0, fam);
    rho.push_back(est.rho_hat);
    auto coord = coordinate_tilt_family(static_cast<std::size_t>(N));
    coord.tangential = true;
    rho_coord.push_back(estimate_best_rho(batch, 2.0, coord).rho_hat);
    o.detail += fmt("N=%d rho_hat %.4g (%s, ess %.0f); ", N, est.rho_hat, est.argmin_id.c_str(), batch.ess);
  }
  const double lo = *std::min_element(rho.begin(), rho.end());
  const double hi = *std::max_element(rho.begin(), rho.end());
  o.pass = lo > 0.0 && hi / lo <= 3.0;
  o.detail += fmt("max/min = %.3f, bound 3", lo > 0.0 ? hi / lo : INFINITY);

  // N = 2 is one-dimensional: u -> exp(-2 psi(u)) on the line (u, -u), so the
  // sampled value can be checked by quadrature.
  DiscretizedMeasure line{2, {}, {}};
  const double r = dw.domain_halfwidth() * (1.0 - 1e-9);
  for (double u = -r; u <= r; u += 1e-3) {
    line.support.push_back(u);
    line.support.push_back(-u);
    line.weights.push_back(std::exp(-2.0 * dw.eval(u, 0)));
  }
  const double mass = std::accumulate(line.weights.begin(), line.weights.end(), 0.0);
  for (double& w : line.weights) w /= mass;
  auto fam2 = default_tilt_family(2);
  fam2.tangential = true;
  const double exact2 = estimate_best_rho(line, 2.0, fam2).rho_hat;
  const double clo = *std::min_element(rho_coord.begin(), rho_coord.end());
  const double chi = *std::max_element(rho_coord.begin(), rho_coord.end());
  o.detail += fmt("; [info] N=2 by quadrature %.4g; coordinate tilts only: %.4g %.4g %.4g, max/min %.3f", exact2,
                  rho_coord[0], rho_coord[1], rho_coord[2], chi / clo);
  return o;
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"gaussian-fixed-point", 10.0, gaussian_fixed_point},
      {"r2-vs-psi4", 120.0, r2_vs_psi4},
      {"cramer-trend", 300.0, cramer_trend},
      {"convexification", 300.0, convexification},
      {"p-growth", 60.0, p_growth},
      {"gradient-identity", 120.0, gradient_identity},
      {"entropy-decomposition", 1.0, entropy_decomposition},
      {"appendix-formulas", 10.0, appendix_formulas},
      {"mlsi-estimator", 30.0, mlsi_estimator},
      {"transport-oracles", 60.0, transport_oracles},
      {"talagrand-closed-form", 60.0, talagrand_closed_form},
      {"kawasaki", 600.0, kawasaki},
      {"dimension-proxy", 300.0, dimension_proxy},
  };
  return all;
}

bool run_one(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_budget = secs <= c.budget_s;
  const bool pass = o.pass && in_budget;
  std::printf("%s %s: %s [%.2f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id.c_str(), o.detail.c_str(), secs,
              c.budget_s, in_budget ? "" : ", over budget");
  std::fflush(stdout);
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <criterion|all>\ncriteria:");
    for (const auto& c : criteria()) std::fprintf(stderr, " %s", c.id.c_str());
    std::fprintf(stderr, "\n");
    return 2;
  }
  const std::string want = argv[1];
  bool all_pass = true;
  bool found = false;
  for (const auto& c : criteria()) {
    if (want != "all" && want != c.id) continue;
    found = true;
    all_pass = run_one(c) && all_pass;
  }
  if (!found) {
    std::fprintf(stderr, "unknown criterion '%s'\n", want.c_str());
    return 2;
  }
  return all_pass ? 0 : 1;
}
