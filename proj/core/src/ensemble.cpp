#include "cglab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cglab/error.hpp"
#include "cglab/quadrature.hpp"

namespace cglab {

std::vector<double> coarse_grain(std::span<const double> x) {
  if (x.size() % 2 != 0) throw InputError("coarse_grain needs an even number of sites, got " + std::to_string(x.size()));
  std::vector<double> y(x.size() / 2);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.5 * (x[2 * i] + x[2 * i + 1]);
  return y;
}

std::vector<double> coarse_grain_adjoint(std::span<const double> y) {
  std::vector<double> x(2 * y.size());
  for (std::size_t i = 0; i < y.size(); ++i) x[2 * i] = x[2 * i + 1] = 0.5 * y[i];
  return x;
}

void CanonicalEnsemble::validate() const {
  if (N < 2) throw InputError("canonical ensemble needs N >= 2");
  if (!std::isfinite(m)) throw InputError("m must be finite");
  if (!contains(potential, m)) throw DomainError("m outside the potential's domain");
}

double CanonicalEnsemble::energy(std::span<const double> x) const {
  double e = 0.0;
  for (double v : x) e += eval(potential, v, 0);
  return e;
}

std::vector<double> SampleBatch::column(std::size_t j) const {
  if (j >= dim) throw InputError("column index out of range");
  std::vector<double> c(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) c[i] = data[i * dim + j];
  return c;
}

double effective_sample_size(std::span<const double> trace) {
  const std::size_t n = trace.size();
  if (n < 4) return static_cast<double>(n);
  const double mean = std::accumulate(trace.begin(), trace.end(), 0.0) / static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (trace[i] - mean) * (trace[i + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double g0 = autocov(0);
  if (!(g0 > 0.0)) return static_cast<double>(n);
  // tau = -1 + 2 sum_k (gamma_{2k} + gamma_{2k+1}) / gamma_0 over the initial positive run.
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < n / 2; ++k) {
    const double pair = (k == 0 ? g0 : autocov(2 * k)) + autocov(2 * k + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair / g0;
  }
  tau = std::max(tau, 1.0 / static_cast<double>(n));
  return std::min(static_cast<double>(n), static_cast<double>(n) / tau);
}

SampleBatch sample_canonical(const CanonicalEnsemble& ensemble, const SamplerSettings& s) {
  ensemble.validate();
  if (s.n_samples < 1) throw InputError("n_samples must be >= 1");
  if (!(s.step_scale > 0.0)) throw InputError("step_scale must be positive");
  if (s.thinning < 1) throw InputError("thinning must be >= 1");

  const auto N = static_cast<std::size_t>(ensemble.N);
  const Potential& psi = ensemble.potential;
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> step(0.0, s.step_scale);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, N - 1);
  std::uniform_int_distribution<std::size_t> pick_other(0, N - 2);

  std::vector<double> x(N, ensemble.m);
  std::vector<double> e(N);
  auto refresh = [&] {
    for (std::size_t i = 0; i < N; ++i) e[i] = eval(psi, x[i], 0);
  };
  refresh();

  std::size_t proposed = 0;
  std::size_t accepted = 0;
  auto sweep = [&](bool count) {
    for (std::size_t k = 0; k < N; ++k) {
      const std::size_t i = pick(rng);
      std::size_t j = pick_other(rng);
      if (j >= i) ++j;
      const double d = step(rng);
      const double xi = x[i] + d;
      const double xj = x[j] - d;
      const double u = unit(rng);
      if (count) ++proposed;
      if (!contains(psi, xi) || !contains(psi, xj)) continue;
      const double ei = eval(psi, xi, 0);
      const double ej = eval(psi, xj, 0);
      const double dE = ei + ej - e[i] - e[j];
      if (dE <= 0.0 || u < std::exp(-dE)) {
        x[i] = xi;
        x[j] = xj;
        e[i] = ei;
        e[j] = ej;
        if (count) ++accepted;
      }
    }
    const double drift = ensemble.m - std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(N);
    if (drift != 0.0) {
      for (double& v : x) v += drift;
      refresh();
    }
  };

  for (std::size_t b = 0; b < s.burn_in; ++b) sweep(false);

  SampleBatch batch;
  batch.n_samples = s.n_samples;
  batch.dim = N;
  batch.seed = s.seed;
  batch.thinning = s.thinning;
  batch.data.reserve(s.n_samples * N);
  std::vector<double> energy(s.n_samples);
  for (std::size_t k = 0; k < s.n_samples; ++k) {
    for (std::size_t t = 0; t < s.thinning; ++t) sweep(true);
    batch.data.insert(batch.data.end(), x.begin(), x.end());
    energy[k] = std::accumulate(e.begin(), e.end(), 0.0);
  }
  batch.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(std::max<std::size_t>(proposed, 1));
  batch.tuning_warning = batch.acceptance_rate < 0.05 || batch.acceptance_rate > 0.95;
  batch.ess = effective_sample_size(energy);
  return batch;
}

double TwoSiteConditional::mass() const { return cdf_.back(); }

double TwoSiteConditional::moment(int k) const {
  if (k < 0) throw InputError("moment order must be non-negative");
  const std::size_t n = (u_.size() - 1) / 2;
  const double h = u_[1] - u_[0];
  if (k % 2 == 1) {
    double s = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      const double weight = j == n ? 0.5 : 1.0;
      s += weight * std::pow(u_[n + j], k) * (w_[n + j] - w_[n - j]);
    }
    return h * s;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u_.size(); ++i) {
    const double weight = (i == 0 || i + 1 == u_.size()) ? 0.5 : 1.0;
    s += weight * std::pow(u_[i], k) * w_[i];
  }
  return h * s;
}

double TwoSiteConditional::quantile(double v) const {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError("quantile level outside [0, 1]");
  const double target = v * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  if (it == cdf_.end()) return u_.back();
  if (it == cdf_.begin()) return u_.front();
  const auto k = static_cast<std::size_t>(std::distance(cdf_.begin(), it)) - 1;
  const double h = u_[k + 1] - u_[k];
  const double a = w_[k];
  const double slope = (w_[k + 1] - w_[k]) / h;
  const double r = target - cdf_[k];
  const double disc = std::max(0.0, a * a + 2.0 * slope * r);
  const double denom = a + std::sqrt(disc);
  const double d = denom > 0.0 ? 2.0 * r / denom : 0.0;
  return u_[k] + std::clamp(d, 0.0, h);
}

TwoSiteConditional two_site_conditional(const Potential& psi, double y, std::size_t n_points,
                                        std::optional<double> u_halfwidth) {
  const auto [lo, hi] = domain(psi);
  const double room = std::min(hi - y, y - lo) * (1.0 - 1e-12);
  if (!(room > 0.0)) throw DomainError("coarse value y outside the potential's domain");
  auto logf = [&](double u) { return -eval(psi, y + u, 0) - eval(psi, y - u, 0); };
  double U;
  if (u_halfwidth) {
    U = *u_halfwidth;
    if (!(U > 0.0) || U > room) throw DomainError("u_halfwidth exceeds the room left by the potential's domain");
  } else {
    const MassWindow w = locate_mass(logf, -room, room);
    U = std::max(std::abs(w.lo), std::abs(w.hi));
  }
  const std::size_t n = std::max<std::size_t>(2, n_points / 2);
  const double h = U / static_cast<double>(n);

  TwoSiteConditional c;
  c.y_ = y;
  c.halfwidth_ = U;
  c.u_.resize(2 * n + 1);
  c.w_.resize(2 * n + 1);
  for (std::size_t i = 0; i <= 2 * n; ++i) {
    c.u_[i] = (static_cast<double>(i) - static_cast<double>(n)) * h;
  }
  // Both halves from the same sums so the density is exactly even.
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j <= n; ++j) {
    const double lw = logf(c.u_[n + j]);
    if (!std::isfinite(lw)) throw NumericalError("non-finite conditional log-density", c.u_[n + j]);
    c.w_[n + j] = c.w_[n - j] = lw;
    peak = std::max(peak, lw);
  }
  for (double& w : c.w_) w = std::exp(w - peak);
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < c.w_.size(); ++i) mass += 0.5 * h * (c.w_[i] + c.w_[i + 1]);
  if (!(mass > 0.0) || !std::isfinite(mass)) throw NumericalError("conditional normalization failed", y);
  for (double& w : c.w_) w /= mass;
  c.cdf_.assign(c.w_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < c.w_.size(); ++i) c.cdf_[i + 1] = c.cdf_[i] + 0.5 * h * (c.w_[i] + c.w_[i + 1]);
  return c;
}

GradientIdentityReport check_gradient_identity(const CanonicalEnsemble& ensemble, const TestFunction& f,
                                               std::span<const double> y, std::size_t n_mc, std::uint64_t seed,
                                               double fd_step, std::size_t n_points) {
  ensemble.validate();
  if (ensemble.N > 8 || ensemble.N % 2 != 0) throw InputError("gradient identity check supports even N <= 8");
  const auto B = static_cast<std::size_t>(ensemble.N / 2);
  if (y.size() != B) throw InputError("coarse configuration must have N/2 entries");
  if (n_mc < 2) throw InputError("n_mc must be >= 2");
  if (!(fd_step > 0.0)) throw InputError("fd_step must be positive");
  if (!f.value || !f.gradient) throw InputError("test function needs value and gradient");

  const Potential& psi = ensemble.potential;
  const auto [lo, hi] = domain(psi);
  std::vector<TwoSiteConditional> base, plus, minus;
  for (std::size_t b = 0; b < B; ++b) {
    const double auto_u = two_site_conditional(psi, y[b], n_points).halfwidth();
    const double room = std::min(hi - (y[b] + fd_step), (y[b] - fd_step) - lo) * (1.0 - 1e-12);
    const double U = std::min(auto_u, room);
    base.push_back(two_site_conditional(psi, y[b], n_points, U));
    plus.push_back(two_site_conditional(psi, y[b] + fd_step, n_points, U));
    minus.push_back(two_site_conditional(psi, y[b] - fd_step, n_points, U));
  }

  const std::size_t N = 2 * B;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> fs(n_mc), g(n_mc * B), k(n_mc * B), d(n_mc * B);
  std::vector<double> v(B), x(N), xp(N), grad(N);
  for (std::size_t s = 0; s < n_mc; ++s) {
    for (std::size_t b = 0; b < B; ++b) {
      v[b] = unit(rng);
      const double u = base[b].quantile(v[b]);
      x[2 * b] = y[b] + u;
      x[2 * b + 1] = y[b] - u;
    }
    fs[s] = f.value(x);
    f.gradient(x, grad);
    for (std::size_t b = 0; b < B; ++b) {
      g[s * B + b] = grad[2 * b] + grad[2 * b + 1];
      k[s * B + b] = eval(psi, x[2 * b], 1) + eval(psi, x[2 * b + 1], 1);
      xp = x;
      const double up = plus[b].quantile(v[b]);
      xp[2 * b] = y[b] + fd_step + up;
      xp[2 * b + 1] = y[b] + fd_step - up;
      const double fp = f.value(xp);
      const double um = minus[b].quantile(v[b]);
      xp[2 * b] = y[b] - fd_step + um;
      xp[2 * b + 1] = y[b] - fd_step - um;
      const double fm = f.value(xp);
      d[s * B + b] = (fp - fm) / (2.0 * fd_step);
    }
  }

  const double n = static_cast<double>(n_mc);
  const double fbar = std::accumulate(fs.begin(), fs.end(), 0.0) / n;
  GradientIdentityReport rep;
  rep.n_mc = n_mc;
  rep.pass = true;
  auto mean_se = [&](auto term) {
    double m = 0.0;
    for (std::size_t s = 0; s < n_mc; ++s) m += term(s);
    m /= n;
    double ss = 0.0;
    for (std::size_t s = 0; s < n_mc; ++s) ss += (term(s) - m) * (term(s) - m);
    return std::pair{m, std::sqrt(ss / (n - 1.0) / n)};
  };
  for (std::size_t b = 0; b < B; ++b) {
    const auto idx = [&](std::size_t s) { return s * B + b; };
    const double lhs = mean_se([&](std::size_t s) { return d[idx(s)]; }).first;
    const double eg = mean_se([&](std::size_t s) { return g[idx(s)]; }).first;
    const double cov = mean_se([&](std::size_t s) { return (fs[s] - fbar) * k[idx(s)]; }).first;
    const auto [res, se] = mean_se([&](std::size_t s) { return d[idx(s)] - g[idx(s)] + (fs[s] - fbar) * k[idx(s)]; });
    const auto [res_p, se_p] =
        mean_se([&](std::size_t s) { return d[idx(s)] - g[idx(s)] - (fs[s] - fbar) * k[idx(s)]; });
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(eg - cov);
    rep.residual.push_back(res);
    rep.se.push_back(se);
    rep.residual_plus.push_back(res_p);
    rep.se_plus.push_back(se_p);
    rep.scale = std::max(rep.scale, std::abs(eg) + std::abs(cov));
    if (std::abs(res) > 3.0 * se + 1e-12) rep.pass = false;
  }
  for (double se : rep.se) {
    if (se > 0.5 * rep.scale) rep.inconclusive = true;
  }
  return rep;
}

namespace {
double qnorm(std::span<const double> x, double q) {
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v), q);
  return s;
}
}  // namespace

NormInequality coarse_norm_inequality(std::span<const double> x, double q) {
  if (!(q >= 1.0)) throw InputError("q must be >= 1");
  auto y = coarse_grain(x);
  for (double& v : y) v *= 2.0;
  NormInequality r;
  r.lhs = qnorm(y, q);
  r.rhs = std::pow(2.0, q) * qnorm(x, q);
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-12);
  return r;
}

NormInequality fluctuation_norm_inequality(std::span<const double> x, double q) {
  if (!(q >= 1.0)) throw InputError("q must be >= 1");
  const auto y = coarse_grain(x);
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i / 2];
  NormInequality out;
  out.lhs = qnorm(r, q);
  out.rhs = qnorm(x, q);
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-12);
  return out;
}

}  // namespace cglab
