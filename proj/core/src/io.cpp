#include "cglab/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cglab/error.hpp"

namespace cglab::io {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'C', 'G', 'L', 'S', 'M', 'P', '0', '1'};

static_assert(std::endian::native == std::endian::little, "sample batch files are little-endian");

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("field '") + key + "' has the wrong type");
  }
}

void write_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw InputError("truncated sample batch header");
  return v;
}

std::string number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::random_device rd;
  const auto tmp = path.string() + ".tmp" + std::to_string(rd());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw InputError("cannot open " + tmp + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw InputError("write to " + tmp + " failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string to_json(const TabulatedPotential& v) {
  json j;
  j["grid_min"] = v.grid().min;
  j["grid_max"] = v.grid().max;
  j["n_nodes"] = v.grid().n_nodes;
  j["values"] = v.values();
  j["p"] = v.p();
  j["c"] = v.c();
  j["iteration_count"] = v.iteration_count();
  j["normalization_offset"] = v.normalization_offset();
  return j.dump(1);
}

TabulatedPotential tabulated_from_json(std::string_view text) {
  const json j = parse(text);
  const UniformGrid grid(field<double>(j, "grid_min"), field<double>(j, "grid_max"), field<std::size_t>(j, "n_nodes"));
  return TabulatedPotential(grid, field<std::vector<double>>(j, "values"), field<double>(j, "p"),
                            field<double>(j, "c"), field<int>(j, "iteration_count"),
                            field<double>(j, "normalization_offset"));
}

std::string to_json(const CertificationReport& r) {
  json j;
  j["rho_p"] = r.rho_p;
  j["c_uniform"] = r.c_uniform;
  j["n_triples"] = r.n_triples;
  j["worst_witness"] = {r.worst_witness.x, r.worst_witness.y, r.worst_witness.t};
  j["method"] = r.method;
  j["p"] = r.p;
  j["second_derivative"] = {{"constant", r.dd_constant}, {"worst_x", r.dd_worst_x}, {"certified", r.dd_certified}};
  return j.dump(1);
}

std::string to_json(const WassersteinResult& r) {
  json j;
  j["p"] = r.p;
  j["value"] = r.value;
  j["method"] = std::string(to_string(r.method));
  j["epsilon"] = r.epsilon;
  j["dual_gap"] = r.dual_gap;
  j["n_points"] = r.n_points;
  return j.dump(1);
}

std::string to_json(const MlsiEstimate& r) {
  json j;
  j["p"] = r.p;
  j["q"] = r.q;
  j["rho_hat"] = r.rho_hat;
  j["family_id"] = r.family_id;
  j["n_functions"] = r.n_functions;
  j["argmin_id"] = r.argmin_id;
  return j.dump(1);
}

void write_sample_batch(const std::filesystem::path& path, const SampleBatch& batch) {
  if (batch.data.size() != batch.n_samples * batch.dim) throw InputError("batch data does not match its shape");
  std::ostringstream os(std::ios::binary);
  os.write(kMagic, sizeof kMagic);
  write_u64(os, batch.n_samples);
  write_u64(os, batch.dim);
  write_u64(os, batch.seed);
  os.write(reinterpret_cast<const char*>(batch.data.data()), static_cast<std::streamsize>(batch.data.size() * sizeof(double)));
  write_file_atomic(path, os.str());

  json meta;
  meta["n_samples"] = batch.n_samples;
  meta["dim"] = batch.dim;
  meta["seed"] = batch.seed;
  meta["ess"] = batch.ess;
  meta["acceptance_rate"] = batch.acceptance_rate;
  meta["thinning"] = batch.thinning;
  meta["tuning_warning"] = batch.tuning_warning;
  write_file_atomic(path.string() + ".json", meta.dump(1));
}

SampleBatch read_sample_batch(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw InputError(path.string() + " is not a sample batch");
  SampleBatch b;
  b.n_samples = read_u64(is);
  b.dim = read_u64(is);
  b.seed = read_u64(is);
  b.data.resize(b.n_samples * b.dim);
  is.read(reinterpret_cast<char*>(b.data.data()), static_cast<std::streamsize>(b.data.size() * sizeof(double)));
  if (!is) throw InputError("truncated sample batch data in " + path.string());
  b.ess = static_cast<double>(b.n_samples);
  const auto sidecar = path.string() + ".json";
  if (std::filesystem::exists(sidecar)) {
    const json meta = parse(read_file(sidecar));
    b.ess = meta.value("ess", b.ess);
    b.acceptance_rate = meta.value("acceptance_rate", 0.0);
    b.thinning = meta.value("thinning", std::size_t{1});
    b.tuning_warning = meta.value("tuning_warning", false);
  }
  return b;
}

std::string to_csv(const DecayTrace& trace) {
  json header;
  header["N"] = trace.N;
  header["m"] = trace.m;
  header["p"] = trace.p;
  header["h"] = trace.h;
  header["seed"] = trace.seed;
  header["fitted_rate"] = trace.fitted_rate;
  header["fit_r2"] = trace.fit_r2;
  header["noise_floor"] = trace.noise_floor;
  header["inconclusive"] = trace.inconclusive;
  if (std::isfinite(trace.initial_entropy)) {
    header["initial_entropy"] = trace.initial_entropy;
  } else {
    header["initial_entropy"] = nullptr;
  }
  std::ostringstream os;
  os << "# " << header.dump() << "\n" << "t,wp,wp_se\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    os << number(trace.times[i]) << ',' << number(trace.wp_values[i]) << ',' << number(trace.wp_se[i]) << '\n';
  }
  return os.str();
}

std::string to_csv(const DeficitTable& table) {
  std::ostringstream os;
  os << "m,phi,phi_dd,psi_K_dd,deficit\n";
  for (const auto& r : table.rows) {
    os << number(r.m) << ',' << number(r.phi) << ',' << number(r.phi_dd) << ',' << number(r.psi_K_dd) << ','
       << number(r.deficit) << '\n';
  }
  return os.str();
}

std::string to_csv(const GrowthReport& report) {
  std::ostringstream os;
  os << "m,phi_gap,phi_d,phi_dd\n";
  for (const auto& r : report.rows) {
    os << number(r.m) << ',' << number(r.phi_gap) << ',' << number(r.phi_d) << ',' << number(r.phi_dd) << '\n';
  }
  return os.str();
}

}  // namespace cglab::io
