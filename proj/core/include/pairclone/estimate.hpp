#pragma once

// Point estimates and posterior summaries.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pairclone/mcmc.hpp"
#include "pairclone/tree.hpp"
#include "pairclone/types.hpp"

namespace pairclone {

// Sum over pairs of the L1 distance between four-bit representatives.
[[nodiscard]] long column_distance(const GenotypeMatrix& a, const GenotypeMatrix& b, int c, int c_other);

struct ColumnAlignment {
  long distance = 0;
  std::vector<int> match;  // column c of `a` pairs with column match[c] of `b`
};

// Minimum over column permutations. Exact enumeration for C <= 8, the
// Hungarian method otherwise.
[[nodiscard]] ColumnAlignment align_columns(const GenotypeMatrix& a, const GenotypeMatrix& b);
[[nodiscard]] long z_distance(const GenotypeMatrix& a, const GenotypeMatrix& b);

// Both solvers on a precomputed C x C cost matrix (row-major).
[[nodiscard]] ColumnAlignment assign_exhaustive(const std::vector<long>& cost, int n);
[[nodiscard]] ColumnAlignment assign_hungarian(const std::vector<long>& cost, int n);

struct PointEstimate {
  std::size_t draw = 0;  // index into PosteriorSamples::draws
  GenotypeMatrix z;
  Matrix w;
  NoiseVector rho{};
  std::optional<TreeTopology> tree;
  double log_post = 0.0;
};

// Draw at C minimising the summed z_distance to the other draws at C. At most
// `cap` draws (evenly spaced) enter the comparison.
[[nodiscard]] PointEstimate select_point_estimate(const PosteriorSamples& samples, int C, std::size_t cap = 2000);

// Draw with the largest stored log posterior among those whose tree is
// label-equivalent to `tree`.
[[nodiscard]] PointEstimate map_estimate(const PosteriorSamples& samples, const TreeTopology& tree);

struct CPosterior {
  std::map<int, double> prob;
  int mode = 0;  // smallest C among ties
};
[[nodiscard]] CPosterior posterior_of_C(const PosteriorSamples& samples);

struct TreePosteriorEntry {
  TreeTopology tree;  // canonical labelling
  double prob = 0.0;
};
// Sorted by decreasing probability, then by tree.
[[nodiscard]] std::vector<TreePosteriorEntry> tree_posterior(const PosteriorSamples& samples);

// Tree and Z relabelled to the canonical labelling; Z column c is node c+1.
struct CanonicalFit {
  TreeTopology tree;
  GenotypeMatrix z;
  Matrix w;  // normal clone weight stays in column 1
};
[[nodiscard]] CanonicalFit canonical_fit(const TreeTopology& tree, const GenotypeMatrix& z, const Matrix& w);

// Number of Z entries that differ after matching labels (tree: canonical
// labelling; flat: best column alignment).
[[nodiscard]] long mismatched_entries(const GenotypeMatrix& a, const GenotypeMatrix& b);

// Weights of `w` reordered so that its subclone columns follow the alignment
// of `z` onto `reference_z`.
[[nodiscard]] Matrix align_weights(const GenotypeMatrix& z, const Matrix& w, const GenotypeMatrix& reference_z);

}  // namespace pairclone
