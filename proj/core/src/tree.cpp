#include "pairclone/tree.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pairclone {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<int> bfs_order(const std::vector<int>& parent) {
  const int n = static_cast<int>(parent.size());
  std::vector<int> order = {1};
  order.reserve(static_cast<std::size_t>(n));
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (int c = 2; c <= n; ++c) {
      if (parent[static_cast<std::size_t>(c - 1)] == order[head]) order.push_back(c);
    }
  }
  return order;
}

}  // namespace

bool is_valid_parent_vector(const std::vector<int>& parent) {
  const int n = static_cast<int>(parent.size());
  if (n == 0 || parent[0] != 0) return false;
  for (int c = 2; c <= n; ++c) {
    const int p = parent[static_cast<std::size_t>(c - 1)];
    if (p < 1 || p > n || p == c) return false;
  }
  return static_cast<int>(bfs_order(parent).size()) == n;
}

TreeTopology::TreeTopology(std::vector<int> parent) : parent_(std::move(parent)) {
  if (!is_valid_parent_vector(parent_)) throw std::invalid_argument("invalid parent vector");
  order_ = bfs_order(parent_);
}

std::vector<int> TreeTopology::children(int node) const {
  std::vector<int> out;
  for (int c = 2; c <= size(); ++c) {
    if (parent(c) == node) out.push_back(c);
  }
  return out;
}

std::string TreeTopology::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < parent_.size(); ++i) os << (i ? "," : "") << parent_[i];
  os << ')';
  return os.str();
}

TreeTopology TreeTopology::parse(const std::string& text) {
  std::vector<int> parent;
  std::string token;
  for (char ch : text) {
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      token.push_back(ch);
    } else if (ch == ',' || ch == ')' || ch == ' ') {
      if (!token.empty()) parent.push_back(std::stoi(token));
      token.clear();
    } else if (ch != '(') {
      throw std::invalid_argument("bad character in tree '" + text + "'");
    }
  }
  if (!token.empty()) parent.push_back(std::stoi(token));
  return TreeTopology(std::move(parent));
}

std::vector<int> depths(const TreeTopology& tree) {
  std::vector<int> eta(static_cast<std::size_t>(tree.size()), 0);
  for (int c : tree.order()) {
    if (c != 1) eta[static_cast<std::size_t>(c - 1)] = eta[static_cast<std::size_t>(tree.parent(c) - 1)] + 1;
  }
  return eta;
}

double log_prior_tree(const TreeTopology& tree, double beta) {
  double s = 0.0;
  for (int eta : depths(tree)) s += std::log1p(static_cast<double>(eta));
  return -beta * s;
}

const std::vector<TreeTopology>& enumerate_topologies(int C) {
  if (C < 1 || C > kMaxEnumeratedNodes) {
    throw std::out_of_range("tree enumeration supports 1.." + std::to_string(kMaxEnumeratedNodes) + " nodes");
  }
  static std::array<std::vector<TreeTopology>, kMaxEnumeratedNodes + 1> cache;
  static std::array<std::once_flag, kMaxEnumeratedNodes + 1> flags;
  std::call_once(flags[static_cast<std::size_t>(C)], [C] {
    auto& out = cache[static_cast<std::size_t>(C)];
    std::vector<int> parent(static_cast<std::size_t>(C), 1);
    parent[0] = 0;
    if (C == 1) {
      out.emplace_back(parent);
      return;
    }
    // odometer over parent[1..C-1] in 1..C
    while (true) {
      if (is_valid_parent_vector(parent)) out.emplace_back(parent);
      int pos = C - 1;
      while (pos >= 1 && parent[static_cast<std::size_t>(pos)] == C) {
        parent[static_cast<std::size_t>(pos)] = 1;
        --pos;
      }
      if (pos < 1) break;
      ++parent[static_cast<std::size_t>(pos)];
    }
  });
  return cache[static_cast<std::size_t>(C)];
}

TopologySpace::TopologySpace(int c_min, int c_max, double beta)
    : c_min_(c_min), c_max_(c_max), beta_(beta), log_norm_(static_cast<std::size_t>(c_max) + 1, 0.0) {
  if (c_min < 1 || c_min > c_max) throw std::invalid_argument("need 1 <= c_min <= c_max");
  for (int C = c_min; C <= c_max; ++C) {
    const auto& trees = enumerate_topologies(C);
    std::vector<double> lp;
    for (const auto& t : trees) {
      trees_.push_back(&t);
      lp.push_back(log_prior_tree(t, beta));
    }
    log_norm_[static_cast<std::size_t>(C)] = log_sum_exp(lp);
  }
}

int TopologySpace::index_of(const TreeTopology& tree) const {
  for (std::size_t i = 0; i < trees_.size(); ++i) {
    if (*trees_[i] == tree) return static_cast<int>(i);
  }
  return -1;
}

double TopologySpace::log_prob_given_C(const TreeTopology& tree) const {
  if (tree.size() < c_min_ || tree.size() > c_max_) return kNegInf;
  return log_prior_tree(tree, beta_) - log_norm_[static_cast<std::size_t>(tree.size())];
}

const TreeTopology& TopologySpace::sample_uniform(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, trees_.size() - 1);
  return *trees_[pick(rng)];
}

double log_prior_tree_size(int C, double alpha) {
  if (C < 1) throw std::invalid_argument("C must be at least 1");
  return (C - 1) * std::log1p(-alpha) + std::log(alpha);
}

TruncPoisson::TruncPoisson(double lambda, int max_upper) : lambda_(lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("Poisson rate must be positive");
  if (max_upper < 0) throw std::invalid_argument("negative truncation bound");
  const auto n = static_cast<std::size_t>(max_upper) + 1;
  log_term_.resize(n);
  log_norm_.assign(n, kNegInf);
  for (std::size_t j = 1; j < n; ++j) {
    log_term_[j] = static_cast<double>(j) * std::log(lambda) - std::lgamma(static_cast<double>(j) + 1.0);
    const double prev = log_norm_[j - 1];
    const double hi = std::max(prev, log_term_[j]);
    log_norm_[j] = hi + std::log(std::exp(prev - hi) + std::exp(log_term_[j] - hi));
  }
}

double TruncPoisson::logpmf(int m, int upper) const {
  if (upper < 1 || m < 1 || m > upper) return kNegInf;
  if (static_cast<std::size_t>(upper) >= log_norm_.size()) throw std::out_of_range("truncation bound exceeds table");
  return log_term_[static_cast<std::size_t>(m)] - log_norm_[static_cast<std::size_t>(upper)];
}

int TruncPoisson::sample(int upper, Rng& rng) const {
  if (upper < 1) throw std::domain_error("truncated Poisson has empty support");
  if (static_cast<std::size_t>(upper) >= log_norm_.size()) throw std::out_of_range("truncation bound exceeds table");
  std::vector<double> lw(log_term_.begin() + 1, log_term_.begin() + upper + 1);
  return sample_log_categorical(lw, rng) + 1;
}

double log_choose(int n, int k) {
  if (k < 0 || k > n) return kNegInf;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

int free_slots(GenotypeCode q) { return 4 - mutation_count(q); }

double log_gain_prob(GenotypeCode parent, GenotypeCode child) {
  const int mult = gain_multiplicity(parent, child);
  if (mult == 0) return kNegInf;
  return std::log(static_cast<double>(mult) / free_slots(parent));
}

const std::vector<std::uint8_t>& gain_targets(GenotypeCode parent) {
  static const auto table = [] {
    std::array<std::vector<std::uint8_t>, kNumGenotypes> t;
    for (int p = 0; p < kNumGenotypes; ++p) {
      for (int q = 0; q < kNumGenotypes; ++q) {
        if (gain_multiplicity(GenotypeCode::from_index(p), GenotypeCode::from_index(q)) > 0) {
          t[static_cast<std::size_t>(p)].push_back(static_cast<std::uint8_t>(q));
        }
      }
    }
    return t;
  }();
  return table[static_cast<std::size_t>(parent.index())];
}

GenotypeMatrix sample_Z_given_tree(const TreeTopology& tree, int pairs, double lambda, Rng& rng) {
  const int C = tree.size();
  GenotypeMatrix z(pairs, C);
  const TruncPoisson tp(lambda, pairs);
  std::vector<int> eligible;
  for (int node : tree.order()) {
    if (node == 1) continue;
    const int c = node - 1;
    const int p = tree.parent(node) - 1;
    eligible.clear();
    for (int k = 0; k < pairs; ++k) {
      z.set(k, c, z(k, p));
      if (free_slots(z(k, p)) > 0) eligible.push_back(k);
    }
    const int m = tp.sample(static_cast<int>(eligible.size()), rng);
    // partial Fisher-Yates for a uniform m-subset
    for (int i = 0; i < m; ++i) {
      std::uniform_int_distribution<int> pick(i, static_cast<int>(eligible.size()) - 1);
      std::swap(eligible[static_cast<std::size_t>(i)], eligible[static_cast<std::size_t>(pick(rng))]);
      const int k = eligible[static_cast<std::size_t>(i)];
      AlleleMatrix rep = representative(z(k, p));
      std::array<std::pair<int, int>, 4> slots{};
      int n_free = 0;
      for (int j = 0; j < 2; ++j) {
        for (int r = 0; r < 2; ++r) {
          if (rep.z[j][r] == 0) slots[static_cast<std::size_t>(n_free++)] = {j, r};
        }
      }
      const auto [j, r] = slots[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, n_free - 1)(rng))];
      rep.z[j][r] = 1;
      z.set(k, c, canonicalize(rep));
    }
  }
  return z;
}

double log_prior_Z_given_tree(const GenotypeMatrix& z, const TreeTopology& tree, double lambda) {
  return log_prior_Z_given_tree(z, tree, TruncPoisson(lambda, z.pairs()));
}

double log_prior_Z_given_tree(const GenotypeMatrix& z, const TreeTopology& tree, const TruncPoisson& tp) {
  if (z.subclones() != tree.size()) throw std::invalid_argument("Z columns do not match tree size");
  const int K = z.pairs();
  for (int k = 0; k < K; ++k) {
    if (z.index(k, 0) != kReferenceGenotype.index()) return kNegInf;
  }
  double lp = 0.0;
  for (int node = 2; node <= tree.size(); ++node) {
    const int c = node - 1;
    const int p = tree.parent(node) - 1;
    int m = 0;
    int eligible = 0;
    for (int k = 0; k < K; ++k) {
      const GenotypeCode zp = z(k, p);
      const GenotypeCode zc = z(k, c);
      if (free_slots(zp) > 0) ++eligible;
      if (zc == zp) continue;
      const double g = log_gain_prob(zp, zc);
      if (!std::isfinite(g)) return kNegInf;
      lp += g;
      ++m;
    }
    lp += tp.logpmf(m, eligible) - log_choose(eligible, m);
    if (!std::isfinite(lp)) return kNegInf;
  }
  return lp;
}

std::vector<std::vector<std::uint8_t>> admissible_row_values(const GenotypeMatrix& z, const TreeTopology& tree,
                                                             int k) {
  const int C = tree.size();
  if (z.subclones() != C) throw std::invalid_argument("Z columns do not match tree size");
  // new-mutation count of each column from the other rows
  std::vector<int> others(static_cast<std::size_t>(C), 0);
  for (int kk = 0; kk < z.pairs(); ++kk) {
    if (kk == k) continue;
    for (int node = 2; node <= C; ++node) {
      if (z.index(kk, node - 1) != z.index(kk, tree.parent(node) - 1)) ++others[static_cast<std::size_t>(node - 1)];
    }
  }
  std::vector<std::vector<std::uint8_t>> out;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(C), 0);
  const auto& order = tree.order();
  auto recurse = [&](auto&& self, std::size_t pos) -> void {
    if (pos == order.size()) {
      out.push_back(row);
      return;
    }
    const int node = order[pos];
    const int c = node - 1;
    if (node == 1) {
      row[0] = static_cast<std::uint8_t>(kReferenceGenotype.index());
      self(self, pos + 1);
      return;
    }
    const std::uint8_t parent_code = row[static_cast<std::size_t>(tree.parent(node) - 1)];
    if (others[static_cast<std::size_t>(c)] >= 1) {
      row[static_cast<std::size_t>(c)] = parent_code;
      self(self, pos + 1);
    }
    for (std::uint8_t q : gain_targets(GenotypeCode::from_index(parent_code))) {
      row[static_cast<std::size_t>(c)] = q;
      self(self, pos + 1);
    }
  };
  recurse(recurse, 0);
  return out;
}

CanonicalTree canonical_labelling(const TreeTopology& tree, const GenotypeMatrix& z) {
  const int C = tree.size();
  if (z.subclones() != C) throw std::invalid_argument("Z columns do not match tree size");
  auto column = [&](int node) {
    std::vector<std::uint8_t> col(static_cast<std::size_t>(z.pairs()));
    for (int k = 0; k < z.pairs(); ++k) col[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(z.index(k, node - 1));
    return col;
  };
  // subtree shape codes, children before parents
  std::vector<std::string> shape(static_cast<std::size_t>(C) + 1);
  const auto bfs = tree.order();
  for (auto it = bfs.rbegin(); it != bfs.rend(); ++it) {
    std::vector<std::string> parts;
    for (int kid : tree.children(*it)) parts.push_back(shape[static_cast<std::size_t>(kid)]);
    std::sort(parts.begin(), parts.end());
    std::string code = "(";
    for (const auto& p : parts) code += p;
    shape[static_cast<std::size_t>(*it)] = code + ")";
  }
  std::vector<int> new_to_old = {1};
  for (std::size_t head = 0; head < new_to_old.size(); ++head) {
    auto kids = tree.children(new_to_old[head]);
    std::stable_sort(kids.begin(), kids.end(), [&](int a, int b) {
      const auto& sa = shape[static_cast<std::size_t>(a)];
      const auto& sb = shape[static_cast<std::size_t>(b)];
      if (sa != sb) return sa < sb;
      return column(a) < column(b);
    });
    new_to_old.insert(new_to_old.end(), kids.begin(), kids.end());
  }
  std::vector<int> old_to_new(static_cast<std::size_t>(C) + 1, 0);
  for (int i = 0; i < C; ++i) old_to_new[static_cast<std::size_t>(new_to_old[static_cast<std::size_t>(i)])] = i + 1;
  std::vector<int> parent(static_cast<std::size_t>(C), 0);
  for (int i = 1; i < C; ++i) {
    parent[static_cast<std::size_t>(i)] = old_to_new[static_cast<std::size_t>(tree.parent(new_to_old[static_cast<std::size_t>(i)]))];
  }
  return {TreeTopology(std::move(parent)), std::move(new_to_old)};
}

}  // namespace pairclone
