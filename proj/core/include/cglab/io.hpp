#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cglab/cramer.hpp"
#include "cglab/ensemble.hpp"
#include "cglab/functional.hpp"
#include "cglab/kawasaki.hpp"
#include "cglab/potential.hpp"
#include "cglab/renorm.hpp"
#include "cglab/transport.hpp"

namespace cglab::io {

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// {grid_min, grid_max, n_nodes, values, p, c, iteration_count, normalization_offset}
std::string to_json(const TabulatedPotential& v);
TabulatedPotential tabulated_from_json(std::string_view text);

/// {rho_p, c_uniform, n_triples, worst_witness: [x, y, t], method, p, second_derivative: {...}}
std::string to_json(const CertificationReport& r);
std::string to_json(const WassersteinResult& r);
std::string to_json(const MlsiEstimate& r);

/// Binary layout: "CGLSMP01", u64 n_samples, u64 dim, u64 seed, then
/// n_samples * dim little-endian float64 in row-major order. The metadata
/// (ess, acceptance rate, thinning) goes to `path` + ".json".
void write_sample_batch(const std::filesystem::path& path, const SampleBatch& batch);
SampleBatch read_sample_batch(const std::filesystem::path& path);

/// "# {json header}" then columns t,wp,wp_se.
std::string to_csv(const DecayTrace& trace);
/// Columns m,phi,phi_dd,psi_K_dd,deficit.
std::string to_csv(const DeficitTable& table);
/// Columns m,phi_gap,phi_d,phi_dd.
std::string to_csv(const GrowthReport& report);

}  // namespace cglab::io
