#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "cglab/cramer.hpp"
#include "cglab/ensemble.hpp"
#include "cglab/error.hpp"
#include "cglab/functional.hpp"
#include "cglab/io.hpp"
#include "cglab/kawasaki.hpp"
#include "cglab/renorm.hpp"
#include "cglab/transport.hpp"

#ifndef CGLAB_VERSION
#define CGLAB_VERSION "unknown"
#endif

namespace cglab::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum class Kind { integer, real, text, int_list, seed };

struct Param {
  std::string key;
  Kind kind;
  json fallback;  // null: no default
  std::string help;
};

struct Subcommand {
  std::string name;
  std::string help;
  std::vector<Param> params;
};

const std::vector<Param>& common_params() {
  static const std::vector<Param> p{
      {"potential", Kind::text, "double-well",
       "gaussian | double-well | x2/2+<b>x<p> | x2/2+<b>cos, or an object in the config file"},
      {"seed", Kind::seed, nullptr, "RNG seed (generated and recorded when absent)"},
      {"threads", Kind::integer, nullptr, "worker threads (default: hardware concurrency)"},
      {"output_dir", Kind::text, nullptr, "artifact directory"},
  };
  return p;
}

const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> s{
      {"renorm",
       "iterate the renormalization map and certify each iterate",
       {{"iterations", Kind::integer, 6, "number of iterates M (K = 2^M)"},
        {"halfwidth", Kind::real, 2.0, "every iterate covers [-halfwidth, halfwidth]"},
        {"step", Kind::real, 0.01, "grid step"},
        {"certify_p", Kind::real, 0.0, "exponent for p-convexity (0: the potential's p)"},
        {"n_triples", Kind::integer, 20000, "secant triples per certification"}}},
      {"cramer",
       "local Cramer deficit of psi_K against phi, and p-growth of phi",
       {{"K", Kind::int_list, json::array({2, 4, 8, 16}), "block sizes (powers of two)"},
        {"m_min", Kind::real, -2.0, "mean grid start"},
        {"m_max", Kind::real, 2.0, "mean grid end"},
        {"m_step", Kind::real, 0.05, "mean grid step"},
        {"step", Kind::real, 0.01, "grid step of the coarse-grained tables"},
        {"growth_p", Kind::real, 0.0, "exponent for the p-growth check (0: the potential's p)"}}},
      {"certify",
       "p-convexity certificate of a coarse-grained potential or a saved table",
       {{"K", Kind::integer, 8, "block size (power of two)"},
        {"halfwidth", Kind::real, 2.0, "table covers [-halfwidth, halfwidth]"},
        {"step", Kind::real, 0.01, "grid step"},
        {"certify_p", Kind::real, 0.0, "exponent (0: the potential's p)"},
        {"n_triples", Kind::integer, 20000, "secant triples"},
        {"table", Kind::text, "", "certify this TabulatedPotential JSON instead"}}},
      {"mlsi",
       "estimate the modified log-Sobolev constant over a tilt family",
       {{"N", Kind::integer, 4, "sites; 1 means the single-site measure by quadrature"},
        {"m", Kind::real, 0.0, "mean of the canonical ensemble"},
        {"p", Kind::real, 2.0, "inequality exponent"},
        {"family", Kind::text, "default", "default | coordinate"},
        {"n_samples", Kind::integer, 20000, "stored samples"},
        {"burn_in", Kind::integer, 2000, "burn-in sweeps"},
        {"thinning", Kind::integer, 5, "sweeps between samples"},
        {"step_scale", Kind::real, 1.0, "proposal standard deviation"},
        {"grid_step", Kind::real, 1e-3, "quadrature step for N = 1"}}},
      {"kawasaki",
       "Kawasaki dynamics and W_p decay to equilibrium",
       {{"N", Kind::integer, 4, "lattice size"},
        {"m", Kind::real, 0.0, "conserved mean"},
        {"h", Kind::real, 0.002, "time step (<= 0.025)"},
        {"T", Kind::real, 2.0, "horizon"},
        {"n_paths", Kind::integer, 256, "paths (and reference batch size)"},
        {"initial", Kind::text, "point-mass", "point-mass | gaussian | equilibrium"},
        {"shift_amplitude", Kind::real, 1.0, "point-mass offset on each half of the lattice"},
        {"gaussian_scale", Kind::real, 1.0, "spread of the gaussian initial law"},
        {"n_checkpoints", Kind::integer, 11, "evenly spaced checkpoints in [0, T]"},
        {"p", Kind::real, 2.0, "Wasserstein exponent"},
        {"method", Kind::text, "matching", "quantile | matching | sinkhorn"},
        {"epsilon", Kind::real, 0.0, "sinkhorn regularization"},
        {"reference_thinning", Kind::integer, 10, "sampler thinning for the equilibrium references"}}},
      {"transport",
       "Wasserstein distance between two sample batches",
       {{"a", Kind::text, "", "first sample batch file (empty: draw Normal(0, 1))"},
        {"b", Kind::text, "", "second sample batch file (empty: draw Normal(shift, 1))"},
        {"n", Kind::integer, 256, "points per generated batch"},
        {"dim", Kind::integer, 1, "dimension of generated batches"},
        {"shift", Kind::real, 1.0, "mean offset of the generated second batch"},
        {"p", Kind::real, 2.0, "exponent"},
        {"method", Kind::text, "matching", "quantile | matching | sinkhorn"},
        {"epsilon_rel", Kind::real, 1e-3, "sinkhorn epsilon as a fraction of the median cost"}}},
  };
  return s;
}

std::string flag_of(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

// Converts a flag string or checks a config value against the parameter kind.
json coerce(const Param& p, const json& v, const std::string& where) {
  auto bad = [&] { return ConfigError("'" + where + "' has the wrong type for " + p.key, where); };
  if (v.is_string() && p.kind != Kind::text) {
    const std::string s = v.get<std::string>();
    try {
      std::size_t used = 0;
      switch (p.kind) {
        case Kind::integer: {
          const long long x = std::stoll(s, &used);
          if (used != s.size()) throw bad();
          return x;
        }
        case Kind::seed: {
          if (!s.empty() && s[0] == '-') throw bad();
          const unsigned long long x = std::stoull(s, &used);
          if (used != s.size()) throw bad();
          return x;
        }
        case Kind::real: {
          const double x = std::stod(s, &used);
          if (used != s.size()) throw bad();
          return x;
        }
        case Kind::int_list: {
          json out = json::array();
          std::stringstream ss(s);
          std::string item;
          while (std::getline(ss, item, ',')) {
            const long long x = std::stoll(item, &used);
            if (used != item.size()) throw bad();
            out.push_back(x);
          }
          if (out.empty()) throw bad();
          return out;
        }
        case Kind::text:
          break;
      }
    } catch (const std::logic_error&) {
      throw bad();
    }
  }
  switch (p.kind) {
    case Kind::integer:
      if (!v.is_number_integer()) throw bad();
      break;
    case Kind::seed:
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) throw bad();
      return v.get<unsigned long long>();
    case Kind::real:
      if (!v.is_number()) throw bad();
      return v.get<double>();
    case Kind::int_list:
      if (v.is_number_integer()) return json::array({v});
      if (!v.is_array() || v.empty()) throw bad();
      for (const auto& x : v) {
        if (!x.is_number_integer()) throw bad();
      }
      break;
    case Kind::text:
      if (!v.is_string() && !(p.key == "potential" && v.is_object())) throw bad();
      break;
  }
  return v;
}

PotentialSpec potential_from(const json& v) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "gaussian") return PotentialSpec::gaussian();
    if (s == "double-well") return make_double_well();
    std::smatch mt;
    static const std::regex power(R"(x2/2\+([0-9.]*)x([0-9.]+))");
    static const std::regex cosine(R"(x2/2\+([0-9.]*)cos)");
    if (std::regex_match(s, mt, power)) {
      return PotentialSpec::quadratic_plus_power(1.0, mt[1].str().empty() ? 1.0 : std::stod(mt[1].str()),
                                                 std::stod(mt[2].str()));
    }
    if (std::regex_match(s, mt, cosine)) {
      return PotentialSpec::quadratic_plus_cosine(1.0, mt[1].str().empty() ? 1.0 : std::stod(mt[1].str()));
    }
    throw ConfigError("unknown potential '" + s + "'", "potential");
  }
  for (const auto& [k, _] : v.items()) {
    if (k != "family" && k != "a" && k != "b" && k != "p" && k != "halfwidth") {
      throw ConfigError("unknown config key 'potential." + k + "'", "potential." + k);
    }
  }
  auto num = [&](const char* k, double d) {
    if (!v.contains(k)) return d;
    if (!v.at(k).is_number()) throw ConfigError(std::string("'potential.") + k + "' must be a number", k);
    return v.at(k).get<double>();
  };
  if (!v.contains("family") || !v.at("family").is_string()) {
    throw ConfigError("potential object needs a 'family' string", "potential.family");
  }
  const std::string family = v.at("family").get<std::string>();
  PotentialSpec psi = PotentialSpec::gaussian();
  if (family == "gaussian") {
    psi = PotentialSpec::gaussian();
  } else if (family == "double-well") {
    psi = make_double_well();
  } else if (family == "quadratic-plus-power") {
    psi = PotentialSpec::quadratic_plus_power(num("a", 1.0), num("b", 1.0), num("p", 4.0));
  } else if (family == "quadratic-plus-cosine") {
    psi = PotentialSpec::quadratic_plus_cosine(num("a", 1.0), num("b", 0.5));
  } else {
    throw ConfigError("unknown potential family '" + family + "'", "potential.family");
  }
  if (v.contains("halfwidth")) psi = psi.with_halfwidth(num("halfwidth", 0.0));
  return psi;
}

struct Artifacts {
  fs::path dir;
  std::vector<std::string> names;

  void write(const std::string& name, std::string_view content) {
    io::write_file_atomic(dir / name, content);
    names.push_back(name);
  }
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// Truncation wide enough for tilts with mean up to |m|.
PotentialSpec widened_for_tilts(const PotentialSpec& psi, double m_abs) {
  const double need = m_abs + std::sqrt(90.0 / std::max(psi.c(), 1e-3)) + 1.0;
  return psi.with_halfwidth(std::max(psi.domain_halfwidth(), need));
}

void run_renorm(const json& c, Artifacts& art, std::ostream& out) {
  const PotentialSpec psi = potential_from(c.at("potential"));
  const int M = c.at("iterations").get<int>();
  const double hw = c.at("halfwidth").get<double>();
  const double p = c.at("certify_p").get<double>() > 0.0 ? c.at("certify_p").get<double>() : psi.p();
  const auto seed = c.at("seed").get<std::uint64_t>();
  const auto ladder = coarse_potential_ladder(psi, M, hw, c.at("step").get<double>(), {}, c.at("threads").get<int>());
  std::string csv = "iterate,K,c_uniform,rho_p,dd_constant,dd_certified\n";
  for (int k = 1; k <= M; ++k) {
    const auto& t = ladder[static_cast<std::size_t>(k - 1)];
    const auto rep = certify_p_convexity(t, p, c.at("n_triples").get<std::size_t>(), seed + static_cast<std::uint64_t>(k),
                                         std::pair{-hw, hw});
    art.write("iterate_" + std::to_string(k) + ".json", io::to_json(t));
    art.write("certification_" + std::to_string(k) + ".json", io::to_json(rep));
    std::ostringstream row;
    row.precision(17);
    row << k << ',' << (1 << k) << ',' << rep.c_uniform << ',' << rep.rho_p << ',' << rep.dd_constant << ','
        << (rep.dd_certified ? "true" : "false") << '\n';
    csv += row.str();
    out << "iterate " << k << " (K = " << (1 << k) << "): c_uniform " << rep.c_uniform << ", rho_" << p << ' '
        << rep.rho_p << '\n';
  }
  art.write("certification.csv", csv);
}

void run_cramer(const json& c, Artifacts& art, std::ostream& out) {
  const double lo = c.at("m_min").get<double>(), hi = c.at("m_max").get<double>();
  if (!(lo < hi)) throw ConfigError("m_min must be below m_max", "m_min");
  const double m_abs = std::max(std::abs(lo), std::abs(hi));
  const PotentialSpec psi = widened_for_tilts(potential_from(c.at("potential")), m_abs);
  const auto grid = UniformGrid::with_step(lo, hi, c.at("m_step").get<double>());
  const int threads = c.at("threads").get<int>();
  std::string summary = "K,max_deficit,ratio_to_previous\n";
  double prev = 0.0;
  for (const auto& kj : c.at("K")) {
    const int K = kj.get<int>();
    const auto table = cramer_deficit(psi, coarse_potential(psi, K, m_abs, c.at("step").get<double>(), {}, threads),
                                      grid, {}, threads);
    art.write("deficit_K" + std::to_string(K) + ".csv", io::to_csv(table));
    std::ostringstream row;
    row.precision(17);
    row << K << ',' << table.max_deficit << ',';
    if (prev > 0.0) row << prev / table.max_deficit;
    summary += row.str() + "\n";
    out << "K = " << K << ": max deficit " << table.max_deficit << '\n';
    prev = table.max_deficit;
  }
  art.write("deficit.csv", summary);
  const double gp = c.at("growth_p").get<double>() > 0.0 ? c.at("growth_p").get<double>() : psi.p();
  const auto growth = check_p_growth(psi, gp, grid, {}, threads);
  art.write("growth.csv", io::to_csv(growth));
  art.write("growth.json", dump({{"p", growth.p},
                                 {"m0", growth.m0},
                                 {"c_phi_growth", growth.c_phi_growth},
                                 {"c_phidd_growth", growth.c_phidd_growth},
                                 {"c_dphi_growth", growth.c_dphi_growth},
                                 {"pass", growth.pass}}));
  out << "p-growth (p = " << gp << "): c " << growth.c_phi_growth << ", C " << growth.c_phidd_growth
      << (growth.pass ? ", pass\n" : ", fail\n");
}

void run_certify(const json& c, Artifacts& art, std::ostream& out) {
  const std::string table_path = c.at("table").get<std::string>();
  std::optional<TabulatedPotential> table;
  double p = c.at("certify_p").get<double>();
  if (!table_path.empty()) {
    table = io::tabulated_from_json(io::read_file(table_path));
    if (!(p > 0.0)) p = table->p();
  } else {
    const PotentialSpec psi = potential_from(c.at("potential"));
    table = coarse_potential(psi, c.at("K").get<int>(), c.at("halfwidth").get<double>(), c.at("step").get<double>(),
                             {}, c.at("threads").get<int>());
    if (!(p > 0.0)) p = psi.p();
    art.write("iterate.json", io::to_json(*table));
  }
  const auto rep = certify_p_convexity(*table, p, c.at("n_triples").get<std::size_t>(), c.at("seed").get<std::uint64_t>());
  art.write("certification.json", io::to_json(rep));
  out << "c_uniform " << rep.c_uniform << ", rho_" << p << ' ' << rep.rho_p << ", derivative route "
      << rep.dd_constant << (rep.dd_certified ? " (certifies)\n" : " (does not certify)\n");
}

void run_mlsi(const json& c, Artifacts& art, std::ostream& out, std::ostream& err) {
  const PotentialSpec psi = potential_from(c.at("potential"));
  const int N = c.at("N").get<int>();
  const std::string fam_name = c.at("family").get<std::string>();
  if (fam_name != "default" && fam_name != "coordinate") throw ConfigError("family must be default or coordinate", "family");
  const auto dim = static_cast<std::size_t>(std::max(N, 1));
  FamilySpec fam = fam_name == "default" ? default_tilt_family(dim) : coordinate_tilt_family(dim);
  const double p = c.at("p").get<double>();
  MlsiEstimate est;
  json extra = json::object();
  if (N == 1) {
    const double hw = psi.domain_halfwidth() - c.at("grid_step").get<double>();
    const auto mu = DiscretizedMeasure::from_log_density_1d([&](double x) { return -psi.eval(x, 0); }, -hw, hw,
                                                            c.at("grid_step").get<double>());
    est = estimate_best_rho(mu, p, fam);
    extra["support_points"] = mu.size();
  } else {
    fam.tangential = true;
    const CanonicalEnsemble ens{N, c.at("m").get<double>(), psi};
    const auto batch = sample_canonical(ens, {c.at("n_samples").get<std::size_t>(), c.at("step_scale").get<double>(),
                                              c.at("burn_in").get<std::size_t>(), c.at("thinning").get<std::size_t>(),
                                              c.at("seed").get<std::uint64_t>()});
    if (batch.tuning_warning) err << "warning: sampler acceptance rate " << batch.acceptance_rate << " is poorly tuned\n";
    io::write_sample_batch(art.dir / "samples.bin", batch);
    art.names.push_back("samples.bin");
    art.names.push_back("samples.bin.json");
    est = estimate_best_rho(batch, p, fam);
    extra["ess"] = batch.ess;
    extra["acceptance_rate"] = batch.acceptance_rate;
  }
  json j = json::parse(io::to_json(est));
  j["measure"] = extra;
  art.write("mlsi.json", dump(j));
  out << "rho_hat " << est.rho_hat << " over " << est.n_functions << " functions (argmin " << est.argmin_id << ")\n";
}

void run_kawasaki(const json& c, Artifacts& art, std::ostream& out) {
  const PotentialSpec psi = potential_from(c.at("potential"));
  const CanonicalEnsemble ens{c.at("N").get<int>(), c.at("m").get<double>(), psi};
  const auto seed = c.at("seed").get<std::uint64_t>();
  KawasakiConfig cfg;
  cfg.N = ens.N;
  cfg.h = c.at("h").get<double>();
  cfg.T = c.at("T").get<double>();
  cfg.n_paths = c.at("n_paths").get<std::size_t>();
  cfg.initial_law = initial_law_from_string(c.at("initial").get<std::string>());
  cfg.shift_amplitude = c.at("shift_amplitude").get<double>();
  cfg.gaussian_scale = c.at("gaussian_scale").get<double>();
  cfg.n_checkpoints = c.at("n_checkpoints").get<std::size_t>();
  cfg.seed = seed;
  cfg.threads = c.at("threads").get<int>();
  const SamplerSettings ref_settings{cfg.n_paths, 1.0, 2000, c.at("reference_thinning").get<std::size_t>(), seed + 1};
  const auto reference = sample_canonical(ens, ref_settings);
  auto floor_settings = ref_settings;
  floor_settings.seed = seed + 2;
  const auto floor_reference = sample_canonical(ens, floor_settings);
  if (cfg.initial_law == InitialLaw::equilibrium) {
    auto start_settings = ref_settings;
    start_settings.seed = seed + 3;
    cfg.initial_batch = sample_canonical(ens, start_settings);
  }
  const auto method = transport_method_from_string(c.at("method").get<std::string>());
  const auto tr = decay_experiment(ens, cfg, c.at("p").get<double>(), method, reference, floor_reference,
                                   c.at("epsilon").get<double>());
  art.write("decay.csv", io::to_csv(tr));
  art.write("decay.json", dump({{"fitted_rate", tr.fitted_rate},
                                {"n2_times_rate", static_cast<double>(tr.N) * tr.N * tr.fitted_rate},
                                {"fit_r2", tr.fit_r2},
                                {"fit_points", tr.fit_points},
                                {"inconclusive", tr.inconclusive},
                                {"noise_floor", tr.noise_floor},
                                {"initial_entropy", number_or_null(tr.initial_entropy)}}));
  out << "fitted rate " << tr.fitted_rate << " (r2 " << tr.fit_r2 << ", " << tr.fit_points << " points"
      << (tr.inconclusive ? ", inconclusive" : "") << ")\n";
}

SampleBatch load_or_draw(const std::string& path, std::size_t n, std::size_t dim, double mean, std::uint64_t seed) {
  if (!path.empty()) return io::read_sample_batch(path);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(mean, 1.0);
  SampleBatch b;
  b.n_samples = n;
  b.dim = dim;
  b.seed = seed;
  b.ess = static_cast<double>(n);
  b.data.resize(n * dim);
  for (double& x : b.data) x = z(rng);
  return b;
}

void run_transport(const json& c, Artifacts& art, std::ostream& out) {
  const auto seed = c.at("seed").get<std::uint64_t>();
  const auto n = c.at("n").get<std::size_t>();
  const auto dim = c.at("dim").get<std::size_t>();
  const auto a = load_or_draw(c.at("a").get<std::string>(), n, dim, 0.0, seed);
  const auto b = load_or_draw(c.at("b").get<std::string>(), n, dim, c.at("shift").get<double>(), seed + 1);
  const double p = c.at("p").get<double>();
  const auto method = transport_method_from_string(c.at("method").get<std::string>());
  double eps = 0.0;
  if (method == TransportMethod::sinkhorn) eps = c.at("epsilon_rel").get<double>() * median_cost(a.data, b.data, a.dim, p);
  const auto r = wasserstein(a, b, p, method, eps);
  art.write("wasserstein.json", io::to_json(r));
  out << "W_" << p << " = " << r.value << " (" << to_string(method) << ", n = " << r.n_points << ")\n";
}

std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"cglab: coarse-graining and functional-inequality experiments"};
  app.require_subcommand(1);
  std::map<std::string, std::string> flags;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", flags["seed"], "RNG seed");
  app.add_option("--out", flags["output_dir"], "output directory");
  app.add_option("--threads", flags["threads"], "worker threads");

  std::map<std::string, std::map<std::string, std::string>> sub_flags;
  for (const auto& s : subcommands()) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->fallthrough();
    sub->set_help_flag("--help", "print this help and exit");
    auto& f = sub_flags[s.name];
    sub->add_option("--potential", f["potential"], common_params()[0].help);
    for (const auto& p : s.params) sub->add_option(flag_of(p.key), f[p.key], p.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ExitCode::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::usage;
  }

  const auto chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  const Subcommand& def = *std::find_if(subcommands().begin(), subcommands().end(),
                                        [&](const Subcommand& s) { return s.name == name; });
  auto param_of = [&](const std::string& key) -> const Param* {
    for (const auto& p : common_params()) {
      if (p.key == key) return &p;
    }
    for (const auto& p : def.params) {
      if (p.key == key) return &p;
    }
    return nullptr;
  };

  const auto t0 = std::chrono::steady_clock::now();
  json resolved = json::object();
  try {
    for (const auto& p : common_params()) {
      if (!p.fallback.is_null()) resolved[p.key] = p.fallback;
    }
    for (const auto& p : def.params) resolved[p.key] = p.fallback;

    if (!config_path.empty()) {
      json file;
      try {
        file = json::parse(io::read_file(config_path));
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what(), "");
      }
      if (!file.is_object()) throw ConfigError("config must be a JSON object", "");
      for (const auto& [key, value] : file.items()) {
        if (key == "subcommand") {
          if (value != name) throw ConfigError("config is for subcommand " + value.dump() + ", not " + name, key);
          continue;
        }
        const Param* p = param_of(key);
        if (p == nullptr) throw ConfigError("unknown config key '" + key + "'", key);
        resolved[key] = coerce(*p, value, key);
      }
    }
    for (auto* flag_set : {&flags, &sub_flags[name]}) {
      for (const auto& [key, value] : *flag_set) {
        if (value.empty()) continue;
        resolved[key] = coerce(*param_of(key), value, flag_of(key));
      }
    }

    if (!resolved.contains("seed")) {
      std::random_device rd;
      resolved["seed"] = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
    if (!resolved.contains("threads")) resolved["threads"] = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (resolved.at("threads").get<int>() < 1) throw ConfigError("threads must be >= 1", "threads");
    if (!resolved.contains("output_dir")) {
      const char* root = std::getenv("CGLAB_OUTPUT_ROOT");
      const fs::path base = root != nullptr && *root != '\0' ? fs::path(root) : fs::path("cglab-out");
      resolved["output_dir"] = (base / (name + "-" + std::to_string(resolved.at("seed").get<std::uint64_t>()))).string();
    }
    resolved["subcommand"] = name;
    potential_from(resolved.at("potential"));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::usage;
  }

  Artifacts art{resolved.at("output_dir").get<std::string>(), {}};
  try {
    fs::create_directories(art.dir);
    art.write("config.json", dump(resolved));
    if (name == "renorm") run_renorm(resolved, art, out);
    if (name == "cramer") run_cramer(resolved, art, out);
    if (name == "certify") run_certify(resolved, art, out);
    if (name == "mlsi") run_mlsi(resolved, art, out, err);
    if (name == "kawasaki") run_kawasaki(resolved, art, out);
    if (name == "transport") run_transport(resolved, art, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::failure;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json manifest{{"config", resolved},
                      {"versions",
                       {{"cglab", CGLAB_VERSION},
                        {"compiler", __VERSION__},
                        {"eigen", eigen_version()},
                        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                        {"cli11", CLI11_VERSION}}},
                      {"wall_time_s", wall},
                      {"artifacts", art.names}};
  io::write_file_atomic(art.dir / "manifest.json", dump(manifest));
  out << "wrote " << art.names.size() + 1 << " files to " << art.dir.string() << '\n';
  return ExitCode::ok;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage{"cglab"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace cglab::cli
