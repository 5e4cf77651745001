#include "cglab/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "cglab/error.hpp"
#include "cglab/transport.hpp"

namespace cglab {
namespace {

void check_positive(std::span<const double> f) {
  for (double v : f) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("entropy argument must be positive and finite");
  }
}

void check_q(double q) {
  if (!(q > 1.0 && q <= 2.0)) throw InputError("q must lie in (1, 2]");
}

double qnorm_q(std::span<const double> v, double q) {
  double s = 0.0;
  for (double x : v) s += q == 2.0 ? x * x : std::pow(std::abs(x), q);
  return s;
}

double xlogx(double x) { return x * std::log(x); }

std::vector<double> default_magnitudes(std::vector<double> m) {
  if (!m.empty()) return m;
  const int n = 12;
  for (int i = 0; i < n; ++i) m.push_back(0.01 * std::pow(300.0, static_cast<double>(i) / (n - 1)));
  return m;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << std::showpos << v;
  return os.str();
}

// exp(lambda g) with g and grad g given.
TestFunction tilt_member(std::string name, double lambda, std::function<double(std::span<const double>)> g,
                         std::function<void(std::span<const double>, std::span<double>)> dg) {
  TestFunction t;
  t.name = std::move(name);
  t.value = [lambda, g](std::span<const double> x) { return std::exp(lambda * g(x)); };
  t.gradient = [lambda, g, dg](std::span<const double> x, std::span<double> out) {
    dg(x, out);
    const double scale = lambda * std::exp(lambda * g(x));
    for (double& o : out) o *= scale;
  };
  return t;
}

void add_tilts(FamilySpec& fam, const std::vector<double>& mags, const std::string& label,
               const std::function<double(std::span<const double>)>& g,
               const std::function<void(std::span<const double>, std::span<double>)>& dg) {
  for (double m : mags) {
    for (double lambda : {m, -m}) fam.members.push_back(tilt_member("exp(" + fmt(lambda) + "*" + label + ")", lambda, g, dg));
  }
}

void add_coordinates(FamilySpec& fam, std::size_t dim, const std::vector<double>& mags) {
  for (std::size_t k = 0; k < dim; ++k) {
    add_tilts(
        fam, mags, "x" + std::to_string(k + 1), [k](std::span<const double> x) { return x[k]; },
        [k](std::span<const double>, std::span<double> out) {
          std::fill(out.begin(), out.end(), 0.0);
          out[k] = 1.0;
        });
  }
}

// Evaluates f and its (optionally tangential) gradient at every point.
template <class PointAt>
void evaluate(const TestFunction& t, std::size_t n, std::size_t dim, bool tangential, PointAt point,
              std::vector<double>& f, std::vector<double>& grad) {
  f.resize(n);
  grad.resize(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = point(i);
    f[i] = t.value(x);
    std::span<double> g(grad.data() + i * dim, dim);
    t.gradient(x, g);
    if (tangential) {
      const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(dim);
      for (double& v : g) v -= mean;
    }
  }
}

template <class EntFn, class EnergyFn>
MlsiEstimate best_rho(double p, const FamilySpec& family, EntFn ent_of, EnergyFn energy_of) {
  if (family.members.empty()) throw EmptyFamilyError("test family '" + family.id + "' has no members");
  MlsiEstimate est;
  est.p = p;
  est.q = dual_exponent(p);
  est.family_id = family.id;
  est.rho_hat = std::numeric_limits<double>::infinity();
  for (const auto& t : family.members) {
    const double ent = ent_of(t);
    if (!(ent >= 1e-12)) continue;
    const double ratio = energy_of(t) / ent;
    ++est.n_functions;
    if (ratio < est.rho_hat) {
      est.rho_hat = ratio;
      est.argmin_id = t.name;
    }
  }
  if (est.n_functions == 0) {
    throw EmptyFamilyError("every member of '" + family.id + "' has entropy below 1e-12");
  }
  est.rho_hat = std::max(0.0, est.rho_hat);
  return est;
}

}  // namespace

double dual_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("p must be finite and > 1");
  const double q = p / (p - 1.0);
  if (std::abs(1.0 / p + 1.0 / q - 1.0) > 1e-14) throw NumericalError("dual exponent bookkeeping failed", p);
  return q;
}

void DiscretizedMeasure::validate() const {
  if (dim == 0) throw InputError("measure dimension must be positive");
  if (weights.empty()) throw InputError("measure has no support");
  if (support.size() != weights.size() * dim) throw InputError("support size does not match weights");
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InputError("negative or NaN weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw InputError("weights do not sum to 1");
}

DiscretizedMeasure DiscretizedMeasure::from_log_density_1d(const std::function<double(double)>& log_density,
                                                           double lo, double hi, double step) {
  if (!(hi > lo) || !(step > 0.0)) throw InputError("bad discretization range");
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  DiscretizedMeasure mu;
  mu.dim = 1;
  mu.support.resize(n);
  mu.weights.resize(n);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    mu.support[i] = lo + static_cast<double>(i) * step;
    mu.weights[i] = log_density(mu.support[i]);
    peak = std::max(peak, mu.weights[i]);
  }
  double s = 0.0;
  for (double& w : mu.weights) s += (w = std::exp(w - peak));
  for (double& w : mu.weights) w /= s;
  return mu;
}

double entropy(std::span<const double> f, const DiscretizedMeasure& mu) {
  if (f.size() != mu.size()) throw InputError("f has the wrong length for the measure");
  check_positive(f);
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    a += mu.weights[i] * xlogx(f[i]);
    b += mu.weights[i] * f[i];
  }
  return a - xlogx(b);
}

Estimate entropy(std::span<const double> f, const SampleBatch& batch) {
  if (f.size() != batch.n_samples) throw InputError("f has the wrong length for the batch");
  if (f.size() < 2) throw InputError("entropy estimate needs at least 2 samples");
  check_positive(f);
  const double n = static_cast<double>(f.size());
  double sa = 0.0, sb = 0.0;
  for (double v : f) {
    sa += xlogx(v);
    sb += v;
  }
  Estimate e;
  e.value = sa / n - xlogx(sb / n);
  std::vector<double> loo(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    loo[i] = (sa - xlogx(f[i])) / (n - 1.0) - xlogx((sb - f[i]) / (n - 1.0));
  }
  const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  e.se = std::sqrt((n - 1.0) / n * ss);
  return e;
}

double mlsi_energy(std::span<const double> f, std::span<const double> grad, const DiscretizedMeasure& mu, double q) {
  check_q(q);
  if (f.size() != mu.size() || grad.size() != mu.size() * mu.dim) throw InputError("f or gradient has the wrong shape");
  check_positive(f);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    s += mu.weights[i] * qnorm_q(grad.subspan(i * mu.dim, mu.dim), q) / std::pow(f[i], q - 1.0);
  }
  return s;
}

Estimate mlsi_energy(std::span<const double> f, std::span<const double> grad, const SampleBatch& batch, double q) {
  check_q(q);
  if (f.size() != batch.n_samples || grad.size() != batch.n_samples * batch.dim) {
    throw InputError("f or gradient has the wrong shape");
  }
  check_positive(f);
  const double n = static_cast<double>(f.size());
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    terms[i] = qnorm_q(grad.subspan(i * batch.dim, batch.dim), q) / std::pow(f[i], q - 1.0);
  }
  Estimate e;
  e.value = std::accumulate(terms.begin(), terms.end(), 0.0) / n;
  double ss = 0.0;
  for (double t : terms) ss += (t - e.value) * (t - e.value);
  e.se = n > 1.0 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return e;
}

FamilySpec default_tilt_family(std::size_t dim, std::vector<double> magnitudes) {
  if (dim == 0) throw InputError("dimension must be positive");
  const auto mags = default_magnitudes(std::move(magnitudes));
  FamilySpec fam;
  fam.id = "tilt-default-d" + std::to_string(dim);
  add_coordinates(fam, dim, mags);
  for (std::size_t k = 0; k < dim; ++k) {
    for (std::size_t l = k + 1; l < dim; ++l) {
      add_tilts(
          fam, mags, "(x" + std::to_string(k + 1) + "-x" + std::to_string(l + 1) + ")",
          [k, l](std::span<const double> x) { return x[k] - x[l]; },
          [k, l](std::span<const double>, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
            out[k] = 1.0;
            out[l] = -1.0;
          });
    }
  }
  for (std::size_t k = 0; k < dim; ++k) {
    for (double s : {-1.0, 0.0, 1.0}) {
      add_tilts(
          fam, mags, "tanh((x" + std::to_string(k + 1) + fmt(-s) + ")/0.5)",
          [k, s](std::span<const double> x) { return std::tanh((x[k] - s) / 0.5); },
          [k, s](std::span<const double> x, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
            const double t = std::tanh((x[k] - s) / 0.5);
            out[k] = (1.0 - t * t) / 0.5;
          });
    }
  }
  return fam;
}

FamilySpec coordinate_tilt_family(std::size_t dim, std::vector<double> magnitudes) {
  if (dim == 0) throw InputError("dimension must be positive");
  FamilySpec fam;
  fam.id = "tilt-coordinates-d" + std::to_string(dim);
  add_coordinates(fam, dim, default_magnitudes(std::move(magnitudes)));
  return fam;
}

MlsiEstimate estimate_best_rho(const DiscretizedMeasure& mu, double p, const FamilySpec& family) {
  mu.validate();
  const double q = dual_exponent(p);
  std::vector<double> f, grad;
  auto point = [&](std::size_t i) { return mu.point(i); };
  return best_rho(
      p, family,
      [&](const TestFunction& t) {
        evaluate(t, mu.size(), mu.dim, family.tangential, point, f, grad);
        return entropy(f, mu);
      },
      [&](const TestFunction&) { return mlsi_energy(f, grad, mu, q); });
}

MlsiEstimate estimate_best_rho(const SampleBatch& batch, double p, const FamilySpec& family) {
  if (batch.n_samples < 2) throw InputError("batch too small");
  const double q = dual_exponent(p);
  std::vector<double> f, grad;
  auto point = [&](std::size_t i) { return batch.row(i); };
  return best_rho(
      p, family,
      [&](const TestFunction& t) {
        evaluate(t, batch.n_samples, batch.dim, family.tangential, point, f, grad);
        return entropy(f, batch).value;
      },
      [&](const TestFunction&) { return mlsi_energy(f, grad, batch, q).value; });
}

double bakry_emery(double rho, double p) {
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (!(p >= 2.0)) throw DomainError("p must be >= 2");
  const double q = dual_exponent(p);
  return std::pow(rho / q, q - 1.0);
}

double tensorize(double rho1, double rho2) {
  if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw DomainError("rho must be positive");
  return std::min(rho1, rho2);
}

HolleyStroock holley_stroock(double rho, double osc_value) {
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (!(osc_value >= 0.0)) throw DomainError("oscillation must be non-negative");
  return {std::exp(-2.0 * osc_value) * rho, std::exp(2.0 * osc_value) * rho};
}

double herbst_concentration_constant(double rho, double p) {
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  const double q = dual_exponent(p);
  return std::pow(rho / q, p - 1.0);
}

LaplaceReport laplace_bound_check(const DiscretizedMeasure& mu, const std::function<double(double)>& f, double rho,
                                  double q, std::span<const double> lambdas) {
  mu.validate();
  if (mu.dim != 1) throw InputError("Laplace check works on one-dimensional measures");
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (!(q > 1.0)) throw DomainError("q must be > 1");
  const std::size_t n = mu.size();
  std::vector<double> fv(n);
  for (std::size_t i = 0; i < n; ++i) fv[i] = f(mu.support[i]);

  LaplaceReport rep;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dx = std::abs(mu.support[i + 1] - mu.support[i]);
    if (dx > 0.0) rep.max_slope = std::max(rep.max_slope, std::abs(fv[i + 1] - fv[i]) / dx);
  }
  if (rep.max_slope > 1.0 + 1e-9) {
    throw InputError("test function is not 1-Lipschitz (slope " + std::to_string(rep.max_slope) + ")");
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += mu.weights[i] * fv[i];
  for (double& v : fv) v -= mean;

  rep.pass = true;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (double lambda : lambdas) {
    if (!(lambda >= 0.0)) throw InputError("lambda must be non-negative");
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (mu.weights[i] > 0.0) mx = std::max(mx, lambda * fv[i]);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += mu.weights[i] * std::exp(lambda * fv[i] - mx);
    LaplaceRow row;
    row.lambda = lambda;
    row.log_lhs = mx + std::log(s);
    row.log_rhs = std::pow(lambda, q) / (rho * (q - 1.0));
    row.margin = row.log_rhs - row.log_lhs;
    rep.worst_margin = std::min(rep.worst_margin, row.margin);
    if (row.margin < -1e-9) rep.pass = false;
    rep.rows.push_back(row);
  }
  return rep;
}

ConcentrationReport concentration_check(const SampleBatch& batch,
                                        const std::function<double(std::span<const double>)>& f, double c, double p,
                                        std::span<const double> r_grid) {
  if (batch.n_samples == 0) throw InputError("empty batch");
  if (!(c > 0.0)) throw DomainError("c must be positive");
  if (!(p >= 1.0)) throw DomainError("p must be >= 1");
  const std::size_t n = batch.n_samples;
  std::vector<double> fv(n);
  for (std::size_t i = 0; i < n; ++i) fv[i] = f(batch.row(i));
  ConcentrationReport rep;
  rep.mean = std::accumulate(fv.begin(), fv.end(), 0.0) / static_cast<double>(n);
  rep.pass = true;
  const double z = 3.0;
  const double nn = static_cast<double>(n);
  for (double r : r_grid) {
    if (!(r >= 0.0)) throw InputError("r must be non-negative");
    const auto hits = static_cast<double>(std::count_if(fv.begin(), fv.end(), [&](double v) { return v >= rep.mean + r; }));
    TailRow row;
    row.r = r;
    row.empirical = hits / nn;
    const double denom = 1.0 + z * z / nn;
    const double centre = (row.empirical + z * z / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(row.empirical * (1.0 - row.empirical) / nn + z * z / (4.0 * nn * nn)) / denom;
    row.ci_lo = std::max(0.0, centre - half);
    row.ci_hi = std::min(1.0, centre + half);
    row.bound = std::exp(-c * std::pow(r, p) / (p * std::pow(p - 1.0, p - 1.0)));
    row.ok = row.ci_lo <= row.bound;
    if (!row.ok) rep.pass = false;
    rep.rows.push_back(row);
  }
  return rep;
}

TalagrandReport talagrand_check(const SampleBatch& mu_batch, const SampleBatch& nu_batch,
                                const std::function<double(std::span<const double>)>& log_density_ratio, double p,
                                double rho_tilde, std::size_t n_boot, std::uint64_t seed) {
  if (!(rho_tilde > 0.0)) throw DomainError("rho_tilde must be positive");
  if (mu_batch.dim != nu_batch.dim) throw InputError("batches differ in dimension");
  if (mu_batch.n_samples != nu_batch.n_samples || mu_batch.n_samples < 2) {
    throw InputError("batches must have equal size >= 2");
  }
  const std::size_t n = mu_batch.n_samples;
  const std::size_t dim = mu_batch.dim;
  auto wpp = [&](std::span<const double> a, std::span<const double> b) {
    return dim == 1 ? wasserstein_1d(a, b, p).power() : wasserstein_matching(a, b, dim, p).power();
  };

  TalagrandReport rep;
  rep.p = p;
  rep.rho_tilde = rho_tilde;
  rep.wpp = wpp(mu_batch.data, nu_batch.data);

  if (n_boot >= 2) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> a(n * dim), b(n * dim), reps;
    for (std::size_t r = 0; r < n_boot; ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto ia = pick(rng), ib = pick(rng);
        std::copy_n(mu_batch.data.begin() + static_cast<std::ptrdiff_t>(ia * dim), dim, a.begin() + static_cast<std::ptrdiff_t>(i * dim));
        std::copy_n(nu_batch.data.begin() + static_cast<std::ptrdiff_t>(ib * dim), dim, b.begin() + static_cast<std::ptrdiff_t>(i * dim));
      }
      reps.push_back(wpp(a, b));
    }
    const double m = std::accumulate(reps.begin(), reps.end(), 0.0) / static_cast<double>(reps.size());
    double ss = 0.0;
    for (double v : reps) ss += (v - m) * (v - m);
    rep.wpp_se = std::sqrt(ss / static_cast<double>(reps.size() - 1));
  }

  std::vector<double> lr(n);
  for (std::size_t i = 0; i < n; ++i) lr[i] = log_density_ratio(nu_batch.row(i));
  rep.entropy = std::accumulate(lr.begin(), lr.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : lr) ss += (v - rep.entropy) * (v - rep.entropy);
  rep.entropy_se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));

  const double k = p / rho_tilde;
  rep.bound = k * rep.entropy;
  rep.margin = rep.bound - rep.wpp;
  rep.margin_se = std::hypot(rep.wpp_se, k * rep.entropy_se);
  rep.pass = rep.margin >= -3.0 * rep.margin_se;
  return rep;
}

DecompositionReport entropy_decomposition_check(const DiscretizedMeasure& joint, std::span<const std::size_t> partition,
                                                std::span<const double> f) {
  joint.validate();
  if (partition.size() != joint.size() || f.size() != joint.size()) throw InputError("partition or f has the wrong length");
  check_positive(f);
  const std::size_t blocks = *std::max_element(partition.begin(), partition.end()) + 1;
  std::vector<double> mass(blocks, 0.0), fmass(blocks, 0.0), flogf(blocks, 0.0);
  std::vector<std::size_t> count(blocks, 0);
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const std::size_t b = partition[i];
    ++count[b];
    mass[b] += joint.weights[i];
    fmass[b] += joint.weights[i] * f[i];
    flogf[b] += joint.weights[i] * xlogx(f[i]);
  }
  for (std::size_t b = 0; b < blocks; ++b) {
    if (count[b] == 0 || !(mass[b] > 0.0)) throw PartitionError("block " + std::to_string(b) + " is empty");
  }

  DecompositionReport rep;
  double total_f = 0.0, total_flogf = 0.0, coarse_flogf = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double fbar = fmass[b] / mass[b];
    total_f += fmass[b];
    total_flogf += flogf[b];
    coarse_flogf += mass[b] * xlogx(fbar);
    rep.conditional += mass[b] * (flogf[b] / mass[b] - xlogx(fbar));
  }
  rep.total = total_flogf - xlogx(total_f);
  rep.coarse = coarse_flogf - xlogx(total_f);
  rep.residual = std::abs(rep.total - rep.coarse - rep.conditional);
  return rep;
}

}  // namespace cglab
