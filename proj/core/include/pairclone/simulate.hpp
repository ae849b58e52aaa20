#pragma once

// Synthetic read-count data with known truth.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pairclone/mcmc.hpp"
#include "pairclone/random.hpp"
#include "pairclone/tree.hpp"
#include "pairclone/types.hpp"

namespace pairclone {

// Rows first..last (1-based, inclusive) of column `column` (1-based) get code `code`.
struct GenotypeBlock {
  int first = 1;
  int last = 1;
  int column = 1;
  int code = 1;
};

// Missing-read rate v (left and right alike) for pairs up to `last` (1-based).
struct MissingSegment {
  int last = 1;
  double v = 0.3;
};

struct SimSpec {
  std::string name = "custom";
  ModelVariant variant = ModelVariant::flat;
  int T = 1;
  int K = 1;  // mutation pairs
  int C = 1;  // columns of Z (tree model: including the normal clone)
  int snvs = 0;  // extra single-SNV rows, observed only as right-missing reads

  // Z truth: explicit blocks over a reference background, or drawn from the
  // tree prior when `tree` is set and `blocks` is empty.
  std::vector<GenotypeBlock> blocks;
  std::optional<TreeTopology> tree;
  double lambda = 0.0;  // <= 0 selects 2K/C

  // Weights: explicit rows (T x J) or Dir(background, sigma(concentration))
  // with a fresh permutation sigma per sample. For the purity variant the
  // last component is the normal clone.
  std::vector<std::vector<double>> w_rows;
  double w_background = 0.01;
  std::vector<double> w_concentration;

  std::optional<NoiseVector> rho;  // drawn from the prior when empty
  double d1 = 1.0;

  std::vector<MissingSegment> missing = {{1 << 30, 0.3}};
  int n_lo = 400;
  int n_hi = 600;
  std::optional<long> n_override;  // fixed N for every (t, k)

  void validate() const;
  [[nodiscard]] int rows() const { return K + snvs; }
};

struct SimTruth {
  GenotypeMatrix z;  // (K + snvs) x C
  Matrix w;
  NoiseVector rho{};
  std::optional<TreeTopology> tree;
  ProbTable p_tilde;  // conditional probabilities p~
  ProbTable p_hat;    // observation probabilities v_class * p~
  std::vector<double> v;  // per row missing rate; SNV rows report 1
};

struct SimData {
  ReadCounts counts;  // pairs then SNV rows
  int pairs = 0;
  int snvs = 0;
  SimTruth truth;
};

[[nodiscard]] SimData generate(const SimSpec& spec, Rng& rng);
[[nodiscard]] SimData generate(const SimSpec& spec, std::uint64_t seed);

// Presets: sim1, sim2, sim3, sim3-k40, purity, tree-sim1, tree-sim1-2000x,
// tree-sim2, tree-sim2-k50, lung.
[[nodiscard]] SimSpec preset(const std::string& name);
[[nodiscard]] std::vector<std::string> preset_names();

struct RatesReport {
  double max_abs_deviation = 0.0;
  // Largest |freq - p| / sqrt(p (1 - p) / N) over cells with 0 < p < 1.
  double max_standardized = 0.0;
  bool zero_mass_violated = false;  // counts seen where p_hat == 0
};

[[nodiscard]] RatesReport empirical_rates_check(const ReadCounts& counts, const SimTruth& truth);

}  // namespace pairclone
