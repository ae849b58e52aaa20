#pragma once

// File formats: count tables, configuration, estimates and run manifests.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pairclone/diagnostics.hpp"
#include "pairclone/estimate.hpp"
#include "pairclone/mcmc.hpp"
#include "pairclone/simulate.hpp"
#include "pairclone/types.hpp"

namespace pairclone {

// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration keys or values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CountsTable {
  ReadCounts counts;
  std::vector<std::string> samples;
  std::vector<std::string> rows;  // pair ids, then SNV ids
  int snvs = 0;
  std::vector<std::string> warnings;

  [[nodiscard]] int pairs() const { return static_cast<int>(rows.size()) - snvs; }
};

// Header: sample_id pair_id n00 n01 n10 n11 nm0 nm1 n0m n1m (tab separated).
// Samples and pairs keep their order of first appearance.
[[nodiscard]] CountsTable parse_counts(const std::filesystem::path& path);

// Header: sample_id snv_id n_total n_variant. Rows are appended to `table`
// as right-missing pairs; every sample must already exist in `table`.
void parse_snv(const std::filesystem::path& path, CountsTable& table);

void write_counts(const std::filesystem::path& path, const CountsTable& table);
void write_snv(const std::filesystem::path& path, const CountsTable& table);

// Count table with generated ids (s1.., p1.., v1..) for simulated data.
[[nodiscard]] CountsTable table_from_simulation(const SimData& data);

// --- configuration -------------------------------------------------------------

// Every tunable of a run; each field has a config key of the same name.
struct RunConfig {
  ModelSpec model;
  SamplerConfig sampler;
  std::size_t point_estimate_cap = 2000;
  // joint test
  int geweke_T = 4;
  int geweke_K = 80;
  int geweke_C = 3;
  long geweke_L = 200000;
  long geweke_depth = 2;
  long geweke_sweeps = 5;
  long geweke_prior_draws = 0;
  // simulate
  std::string preset = "sim1";
  std::optional<long> depth;
};

// key = value lines; '#' starts a comment. Unknown keys are errors.
[[nodiscard]] std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
void apply_settings(RunConfig& config, const std::map<std::string, std::string>& settings);
[[nodiscard]] std::vector<std::string> config_keys();

// Effective configuration as sorted key = value lines.
[[nodiscard]] std::string dump_config(const RunConfig& config);
[[nodiscard]] std::uint64_t fnv1a64(const std::string& text);

// --- outputs -------------------------------------------------------------------

void write_z(const std::filesystem::path& path, const GenotypeMatrix& z, CodeOrdering ordering,
             const std::vector<std::string>& rows);
void write_weights(const std::filesystem::path& path, const Matrix& w, ModelVariant variant,
                   const std::vector<std::string>& samples);
void write_rho(const std::filesystem::path& path, const NoiseVector& rho);
void write_c_posterior(const std::filesystem::path& path, const CPosterior& post);
void write_tree_posterior(const std::filesystem::path& path, const std::vector<TreePosteriorEntry>& post);
void write_telemetry(const std::filesystem::path& path, const Telemetry& telemetry);
void write_trace(const std::filesystem::path& path, const Telemetry& telemetry);
void write_residuals(const std::filesystem::path& path, const ReadCounts& resid, const CountsTable& table);
void write_geweke(const std::filesystem::path& path, const GewekeReport& report);

// Retained draws, one line each; read back by `summarize`.
void write_draws(const std::filesystem::path& path, const PosteriorSamples& samples);
[[nodiscard]] PosteriorSamples read_draws(const std::filesystem::path& path);

[[nodiscard]] std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace pairclone
