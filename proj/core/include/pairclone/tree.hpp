#pragma once

// Phylogeny over subclones: parent vectors, the tree prior, the enumerated
// (tree, C) space, and the prior on Z given a tree.
//
// Nodes are labelled 1..C; node 1 is the normal clone and the root. Column c-1
// of a GenotypeMatrix holds node c.

#include <cstdint>
#include <string>
#include <vector>

#include "pairclone/random.hpp"
#include "pairclone/types.hpp"

namespace pairclone {

class TreeTopology {
 public:
  TreeTopology() = default;
  // parent[c-1] is the parent of node c; parent[0] must be 0.
  explicit TreeTopology(std::vector<int> parent);

  [[nodiscard]] int size() const { return static_cast<int>(parent_.size()); }
  [[nodiscard]] int parent(int node) const { return parent_[static_cast<std::size_t>(node - 1)]; }
  [[nodiscard]] const std::vector<int>& parents() const { return parent_; }

  // Nodes ordered so that every parent precedes its children (breadth first).
  [[nodiscard]] const std::vector<int>& order() const { return order_; }
  [[nodiscard]] std::vector<int> children(int node) const;

  [[nodiscard]] std::string to_string() const;  // "(0,1,1,2)"
  static TreeTopology parse(const std::string& text);

  friend bool operator==(const TreeTopology& a, const TreeTopology& b) { return a.parent_ == b.parent_; }
  friend bool operator<(const TreeTopology& a, const TreeTopology& b) { return a.parent_ < b.parent_; }

 private:
  std::vector<int> parent_;
  std::vector<int> order_;
};

// Whether `parent` describes a tree rooted at node 1.
[[nodiscard]] bool is_valid_parent_vector(const std::vector<int>& parent);

// eta_c = generations between node c and the root.
[[nodiscard]] std::vector<int> depths(const TreeTopology& tree);

// -beta * sum_c log(1 + eta_c)
[[nodiscard]] double log_prior_tree(const TreeTopology& tree, double beta);

inline constexpr int kMaxEnumeratedNodes = 8;

// Every tree on C labelled nodes rooted at node 1, in lexicographic parent order.
// Cached; throws std::out_of_range above kMaxEnumeratedNodes.
[[nodiscard]] const std::vector<TreeTopology>& enumerate_topologies(int C);

// The union of enumerated trees for C in [c_min, c_max], with p(T | C)
// normalisers for a given beta.
class TopologySpace {
 public:
  TopologySpace(int c_min, int c_max, double beta);

  [[nodiscard]] int size() const { return static_cast<int>(trees_.size()); }
  [[nodiscard]] const TreeTopology& at(int i) const { return *trees_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] int index_of(const TreeTopology& tree) const;
  [[nodiscard]] int c_min() const { return c_min_; }
  [[nodiscard]] int c_max() const { return c_max_; }

  // log p(T | C), normalised over the trees of size C.
  [[nodiscard]] double log_prob_given_C(const TreeTopology& tree) const;

  // Uniform over all elements.
  [[nodiscard]] const TreeTopology& sample_uniform(Rng& rng) const;

 private:
  int c_min_;
  int c_max_;
  double beta_;
  std::vector<const TreeTopology*> trees_;
  std::vector<double> log_norm_;  // indexed by C
};

// log p(C) = (C-1) log(1-alpha) + log alpha
[[nodiscard]] double log_prior_tree_size(int C, double alpha);

// Trunc-Pois(lambda; [1, upper]) with tables for upper = 0..max_upper.
class TruncPoisson {
 public:
  TruncPoisson(double lambda, int max_upper);

  [[nodiscard]] double lambda() const { return lambda_; }
  // -inf outside [1, upper].
  [[nodiscard]] double logpmf(int m, int upper) const;
  [[nodiscard]] int sample(int upper, Rng& rng) const;

 private:
  double lambda_;
  std::vector<double> log_term_;  // log(lambda^j / j!)
  std::vector<double> log_norm_;  // log sum_{j=1}^{u} lambda^j / j!
};

[[nodiscard]] double log_choose(int n, int k);

// Number of unmutated (allele, locus) slots, 4 - mutation_count(q).
[[nodiscard]] int free_slots(GenotypeCode q);

// log p(z_kc = child | z_kp = parent, pair k gains one mutation):
// log(gain_multiplicity / free_slots). Each slot has probability 1/free_slots,
// and several slots can yield the same canonical code. -inf if unreachable.
[[nodiscard]] double log_gain_prob(GenotypeCode parent, GenotypeCode child);

// Code indices reachable from `parent` by one new mutation.
[[nodiscard]] const std::vector<std::uint8_t>& gain_targets(GenotypeCode parent);

// Generative draw of Z given the tree. Column 0 is all reference. Throws when
// some parent has every pair fully mutated (no child can be formed).
[[nodiscard]] GenotypeMatrix sample_Z_given_tree(const TreeTopology& tree, int pairs, double lambda,
                                                 Rng& rng);

[[nodiscard]] double log_prior_Z_given_tree(const GenotypeMatrix& z, const TreeTopology& tree,
                                            double lambda);
[[nodiscard]] double log_prior_Z_given_tree(const GenotypeMatrix& z, const TreeTopology& tree,
                                            const TruncPoisson& tp);

// Rows z_k. with positive prior density given the other rows. Each entry is a
// row of C code indices.
[[nodiscard]] std::vector<std::vector<std::uint8_t>> admissible_row_values(const GenotypeMatrix& z,
                                                                           const TreeTopology& tree,
                                                                           int k);

// Relabels non-root nodes breadth first, ordering siblings by subtree shape
// and then by their Z column (lexicographic on code indices). Isomorphic trees
// get the same parent vector, and label-equivalent (tree, Z) pairs map to the
// same representative. new_to_old[c-1] is the old label of new node c.
struct CanonicalTree {
  TreeTopology tree;
  std::vector<int> new_to_old;
};
[[nodiscard]] CanonicalTree canonical_labelling(const TreeTopology& tree, const GenotypeMatrix& z);

}  // namespace pairclone
