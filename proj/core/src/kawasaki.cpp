#include "cglab/kawasaki.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "cglab/error.hpp"
#include "cglab/parallel.hpp"
#include "cglab/renorm.hpp"

namespace cglab {
namespace {

constexpr double kBlowUp = 1e3;

// x <- x - h A grad H(x) + sqrt(2h) S xi, optionally re-projected to the mean.
class Stepper {
 public:
  Stepper(const CanonicalEnsemble& ens, const Eigen::MatrixXd& S, double h, bool reproject)
      : ens_(ens), S_(S), h_(h), noise_(std::sqrt(2.0 * h)), reproject_(reproject),
        n_(static_cast<std::size_t>(ens.N)), grad_(n_), xi_(static_cast<Eigen::Index>(n_)) {}

  // Returns |change of the mean| for this step before any re-projection.
  template <class Rng>
  double step(std::vector<double>& x, Rng& rng) {
    for (std::size_t i = 0; i < n_; ++i) grad_[i] = eval(ens_.potential, x[i], 1);
    for (Eigen::Index i = 0; i < xi_.size(); ++i) xi_[i] = normal_(rng);
    const Eigen::VectorXd kick = S_ * xi_;
    double before = 0.0, after = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double drift = 2.0 * grad_[i] - grad_[(i + 1) % n_] - grad_[(i + n_ - 1) % n_];
      before += x[i];
      x[i] += -h_ * drift + noise_ * kick[static_cast<Eigen::Index>(i)];
      after += x[i];
      if (!(std::abs(x[i]) <= kBlowUp)) {
        throw BlowUpError("Kawasaki path left [-1e3, 1e3]; try a smaller time step than h = " + std::to_string(h_));
      }
    }
    const double drift = (after - before) / static_cast<double>(n_);
    if (reproject_) {
      const double shift = ens_.m - after / static_cast<double>(n_);
      for (double& v : x) v += shift;
    }
    return std::abs(drift);
  }

 private:
  const CanonicalEnsemble& ens_;
  const Eigen::MatrixXd& S_;
  double h_;
  double noise_;
  bool reproject_;
  std::size_t n_;
  std::vector<double> grad_;
  Eigen::VectorXd xi_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::mt19937_64 path_rng(std::uint64_t seed, std::size_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

std::vector<double> initial_state(const CanonicalEnsemble& ens, const KawasakiConfig& cfg, std::size_t path,
                                  std::mt19937_64& rng) {
  const auto N = static_cast<std::size_t>(ens.N);
  std::vector<double> x(N, ens.m);
  switch (cfg.initial_law) {
    case InitialLaw::point_mass: {
      std::vector<double> s = cfg.shift;
      if (s.empty()) {
        s.resize(N);
        for (std::size_t i = 0; i < N; ++i) s[i] = i < N / 2 ? cfg.shift_amplitude : -cfg.shift_amplitude;
      }
      const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(N);
      for (std::size_t i = 0; i < N; ++i) x[i] += s[i] - mean;
      break;
    }
    case InitialLaw::gaussian: {
      std::normal_distribution<double> normal(0.0, cfg.gaussian_scale);
      std::vector<double> z(N);
      for (double& v : z) v = normal(rng);
      const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(N);
      for (std::size_t i = 0; i < N; ++i) x[i] += z[i] - mean;
      break;
    }
    case InitialLaw::equilibrium: {
      const auto row = cfg.initial_batch->row(path);
      x.assign(row.begin(), row.end());
      break;
    }
  }
  return x;
}

double wpp_of(std::span<const double> a, std::span<const double> b, std::size_t dim, double p, TransportMethod method,
              double epsilon) {
  switch (method) {
    case TransportMethod::quantile:
      if (dim != 1) throw InputError("quantile coupling needs one-dimensional samples");
      return wasserstein_1d(a, b, p).power();
    case TransportMethod::matching: return wasserstein_matching(a, b, dim, p).power();
    case TransportMethod::sinkhorn: return wasserstein_sinkhorn(a, b, dim, p, epsilon).power();
  }
  throw InputError("unknown transport method");
}

}  // namespace

Eigen::MatrixXd discrete_laplacian(int N) {
  if (N < 2) throw InputError("discrete Laplacian needs N >= 2");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    A(i, i) += 2.0;
    A(i, (i + 1) % N) -= 1.0;
    A(i, (i + N - 1) % N) -= 1.0;
  }
  return A;
}

Eigen::MatrixXd operator_sqrt(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() == 0) throw InputError("operator_sqrt needs a nonempty square matrix");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InputError("matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed", 0.0);
  Eigen::VectorXd ev = es.eigenvalues();
  const double radius = ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -1e-10 * std::max(1.0, radius)) throw DomainError("matrix has a negative eigenvalue");
    ev[i] = ev[i] <= 1e-12 * radius ? 0.0 : std::sqrt(ev[i]);
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

std::string_view to_string(InitialLaw law) {
  switch (law) {
    case InitialLaw::point_mass: return "point-mass";
    case InitialLaw::gaussian: return "gaussian";
    case InitialLaw::equilibrium: return "equilibrium";
  }
  return "point-mass";
}

InitialLaw initial_law_from_string(std::string_view name) {
  if (name == "point-mass") return InitialLaw::point_mass;
  if (name == "gaussian") return InitialLaw::gaussian;
  if (name == "equilibrium") return InitialLaw::equilibrium;
  throw InputError("unknown initial law '" + std::string(name) + "'");
}

void KawasakiConfig::validate() const {
  if (N < 2) throw InputError("Kawasaki lattice needs N >= 2");
  if (!(h > 0.0) || h > 0.1 / 4.0) throw InputError("time step must satisfy 0 < h <= 0.025");
  if (!(T > 0.0)) throw InputError("horizon T must be positive");
  if (n_paths < 1) throw InputError("n_paths must be >= 1");
  if (initial_law == InitialLaw::point_mass && !shift.empty() && shift.size() != static_cast<std::size_t>(N)) {
    throw InputError("shift must have N entries");
  }
  if (initial_law == InitialLaw::gaussian && !(gaussian_scale > 0.0)) throw InputError("gaussian_scale must be positive");
  if (initial_law == InitialLaw::equilibrium) {
    if (!initial_batch) throw InputError("equilibrium start needs an initial batch");
    if (initial_batch->dim != static_cast<std::size_t>(N) || initial_batch->n_samples < n_paths) {
      throw InputError("initial batch must have N columns and at least n_paths rows");
    }
  }
  if (checkpoints.empty() && n_checkpoints < 2) throw InputError("need at least 2 checkpoints");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 0.0 || checkpoints[i] > T) throw InputError("checkpoint outside [0, T]");
    if (i > 0 && !(checkpoints[i] > checkpoints[i - 1])) throw InputError("checkpoints must increase");
  }
}

std::vector<double> KawasakiConfig::checkpoint_times() const {
  if (!checkpoints.empty()) return checkpoints;
  std::vector<double> t(n_checkpoints);
  for (std::size_t i = 0; i < n_checkpoints; ++i) t[i] = T * static_cast<double>(i) / static_cast<double>(n_checkpoints - 1);
  return t;
}

KawasakiRun simulate(const CanonicalEnsemble& ensemble, const KawasakiConfig& config) {
  ensemble.validate();
  config.validate();
  if (config.N != ensemble.N) throw InputError("config N differs from the ensemble");
  const auto N = static_cast<std::size_t>(ensemble.N);
  const Eigen::MatrixXd S = operator_sqrt(discrete_laplacian(ensemble.N));
  const std::vector<double> times = config.checkpoint_times();
  std::vector<std::size_t> at_step(times.size());
  for (std::size_t c = 0; c < times.size(); ++c) at_step[c] = static_cast<std::size_t>(std::llround(times[c] / config.h));

  KawasakiRun run;
  run.times = times;
  run.steps = at_step.back();
  run.batches.resize(times.size());
  for (auto& b : run.batches) {
    b.n_samples = config.n_paths;
    b.dim = N;
    b.seed = config.seed;
    b.data.assign(config.n_paths * N, 0.0);
    b.ess = static_cast<double>(config.n_paths);
  }
  std::vector<double> step_drift(config.n_paths, 0.0), final_err(config.n_paths, 0.0);

  parallel_for(config.n_paths, config.threads, [&](std::size_t path) {
    auto rng = path_rng(config.seed, path);
    std::vector<double> x = initial_state(ensemble, config, path, rng);
    Stepper stepper(ensemble, S, config.h, config.reproject);
    std::size_t done = 0;
    for (std::size_t c = 0; c < times.size(); ++c) {
      for (; done < at_step[c]; ++done) step_drift[path] = std::max(step_drift[path], stepper.step(x, rng));
      std::copy(x.begin(), x.end(), run.batches[c].data.begin() + static_cast<std::ptrdiff_t>(path * N));
    }
    final_err[path] = std::abs(std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(N) - ensemble.m);
  });
  run.max_step_drift = *std::max_element(step_drift.begin(), step_drift.end());
  run.final_mean_error = *std::max_element(final_err.begin(), final_err.end());
  return run;
}

double gaussian_initial_entropy(const CanonicalEnsemble& ensemble, double scale, std::size_t n_mc,
                                std::uint64_t seed) {
  const auto* psi = std::get_if<PotentialSpec>(&ensemble.potential);
  if (psi == nullptr || (ensemble.N != 2 && ensemble.N != 4)) return std::numeric_limits<double>::quiet_NaN();
  const auto N = static_cast<std::size_t>(ensemble.N);
  // Density of the initial law on the hyperplane: (2 pi s^2)^{-(N-1)/2} exp(-|x - m|^2 / 2 s^2).
  const double self = -0.5 * static_cast<double>(N - 1) * std::log(2.0 * std::numbers::pi * std::numbers::e * scale * scale);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> z(N);
  double energy = 0.0;
  for (std::size_t k = 0; k < n_mc; ++k) {
    for (double& v : z) v = normal(rng);
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(N);
    for (double v : z) {
      const double x = ensemble.m + v - mean;
      if (!psi->contains(x)) return std::numeric_limits<double>::infinity();
      energy += psi->eval(x, 0);
    }
  }
  energy /= static_cast<double>(n_mc);
  return self + energy + log_canonical_partition(*psi, ensemble.N, ensemble.m);
}

DecayTrace decay_experiment(const CanonicalEnsemble& ensemble, const KawasakiConfig& config, double p,
                            TransportMethod method, const SampleBatch& reference, const SampleBatch& floor_reference,
                            double epsilon) {
  const auto N = static_cast<std::size_t>(ensemble.N);
  for (const SampleBatch* b : {&reference, &floor_reference}) {
    if (b->dim != N || b->n_samples != config.n_paths) {
      throw InputError("reference batches must have N columns and n_paths rows");
    }
  }
  if (config.n_paths < 8) throw InputError("decay experiment needs at least 8 paths");
  const KawasakiRun run = simulate(ensemble, config);

  DecayTrace tr;
  tr.p = p;
  tr.N = ensemble.N;
  tr.m = ensemble.m;
  tr.h = config.h;
  tr.seed = config.seed;
  tr.times = run.times;
  tr.noise_floor = wpp_of(reference.data, floor_reference.data, N, p, method, epsilon);

  const std::size_t quarter = config.n_paths / 4;
  for (const SampleBatch& batch : run.batches) {
    const double wpp = wpp_of(batch.data, reference.data, N, p, method, epsilon);
    double groups[4];
    for (std::size_t g = 0; g < 4; ++g) {
      const std::span<const double> a(batch.data.data() + g * quarter * N, quarter * N);
      const std::span<const double> b(reference.data.data() + g * quarter * N, quarter * N);
      groups[g] = wpp_of(a, b, N, p, method, epsilon);
    }
    const double gm = (groups[0] + groups[1] + groups[2] + groups[3]) / 4.0;
    double ss = 0.0;
    for (double v : groups) ss += (v - gm) * (v - gm);
    const double se_pp = std::sqrt(ss / 3.0 / 4.0);
    const double wp = std::pow(std::max(wpp, 0.0), 1.0 / p);
    tr.wpp_values.push_back(wpp);
    tr.wp_values.push_back(wp);
    tr.wp_se.push_back(wp > 0.0 ? se_pp / (p * std::pow(wp, p - 1.0)) : 0.0);
  }

  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    if (tr.wpp_values[i] > 3.0 * tr.noise_floor && tr.wpp_values[i] > 0.0) {
      ts.push_back(tr.times[i]);
      ys.push_back(std::log(tr.wpp_values[i]));
    } else if (!ts.empty()) {
      break;
    }
  }
  tr.fit_points = ts.size();
  tr.inconclusive = ts.size() < 3;
  if (!tr.inconclusive) {
    const double n = static_cast<double>(ts.size());
    const double mt = std::accumulate(ts.begin(), ts.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      stt += (ts[i] - mt) * (ts[i] - mt);
      sty += (ts[i] - mt) * (ys[i] - my);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sty / stt;
    tr.fitted_rate = -slope;
    tr.fit_r2 = syy > 0.0 ? (sty * sty) / (stt * syy) : 1.0;
  }
  tr.initial_entropy = config.initial_law == InitialLaw::gaussian
                           ? gaussian_initial_entropy(ensemble, config.gaussian_scale, 100000, config.seed)
                           : std::numeric_limits<double>::quiet_NaN();
  return tr;
}

GeneratorCheck generator_check(const CanonicalEnsemble& ensemble, std::span<const double> x0,
                               const Eigen::MatrixXd& Q, double h, int steps, std::size_t n_paths,
                               std::uint64_t seed) {
  ensemble.validate();
  const auto N = static_cast<std::size_t>(ensemble.N);
  if (x0.size() != N || Q.rows() != ensemble.N || Q.cols() != ensemble.N) throw InputError("shape mismatch");
  if (steps < 1 || n_paths < 2) throw InputError("need steps >= 1 and n_paths >= 2");
  const Eigen::MatrixXd A = discrete_laplacian(ensemble.N);
  const Eigen::MatrixXd S = operator_sqrt(A);
  auto phi = [&](const std::vector<double>& x) {
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(N));
    return 0.5 * v.dot(Q * v);
  };

  Eigen::VectorXd g(static_cast<Eigen::Index>(N)), xv(static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < N; ++i) {
    g[static_cast<Eigen::Index>(i)] = eval(ensemble.potential, x0[i], 1);
    xv[static_cast<Eigen::Index>(i)] = x0[i];
  }
  GeneratorCheck out;
  out.analytic = -(A * g).dot(Q * xv) + (A * Q).trace();

  const std::vector<double> start(x0.begin(), x0.end());
  const double phi0 = phi(start);
  const double delta = steps * h;
  std::vector<double> est(n_paths);
  for (std::size_t k = 0; k < n_paths; ++k) {
    auto rng = path_rng(seed, k);
    Stepper stepper(ensemble, S, h, false);
    std::vector<double> x = start;
    for (int s = 0; s < steps; ++s) stepper.step(x, rng);
    const double d1 = phi(x) - phi0;
    for (int s = 0; s < steps; ++s) stepper.step(x, rng);
    const double d2 = phi(x) - phi0;
    est[k] = (4.0 * d1 - d2) / (2.0 * delta);
  }
  const double n = static_cast<double>(n_paths);
  out.estimate = std::accumulate(est.begin(), est.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : est) ss += (v - out.estimate) * (v - out.estimate);
  out.se = std::sqrt(ss / (n - 1.0) / n);
  out.pass = std::abs(out.estimate - out.analytic) <= 3.0 * out.se;
  return out;
}

}  // namespace cglab
