#include "pairclone/estimate.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pairclone {
namespace {

// Four-bit representative of every code index.
const std::array<std::uint8_t, kNumGenotypes>& nibbles() {
  static const auto table = [] {
    std::array<std::uint8_t, kNumGenotypes> t{};
    for (int q = 0; q < kNumGenotypes; ++q) {
      const auto b = bit_vector(GenotypeCode::from_index(q));
      t[static_cast<std::size_t>(q)] = static_cast<std::uint8_t>(b[0] << 3 | b[1] << 2 | b[2] << 1 | b[3]);
    }
    return t;
  }();
  return table;
}

int nibble_distance(int qa, int qb) {
  const auto& n = nibbles();
  return std::popcount(static_cast<unsigned>(n[static_cast<std::size_t>(qa)] ^ n[static_cast<std::size_t>(qb)]));
}

void check_shapes(const GenotypeMatrix& a, const GenotypeMatrix& b) {
  if (a.pairs() != b.pairs() || a.subclones() != b.subclones()) {
    throw std::invalid_argument("genotype matrices differ in shape");
  }
}

std::vector<long> cost_matrix(const GenotypeMatrix& a, const GenotypeMatrix& b) {
  const int C = a.subclones();
  std::vector<long> cost(static_cast<std::size_t>(C) * C, 0);
  for (int k = 0; k < a.pairs(); ++k) {
    for (int c = 0; c < C; ++c) {
      for (int d = 0; d < C; ++d) cost[static_cast<std::size_t>(c) * C + d] += nibble_distance(a.index(k, c), b.index(k, d));
    }
  }
  return cost;
}

ColumnAlignment solve(const std::vector<long>& cost, int n) {
  return n <= 8 ? assign_exhaustive(cost, n) : assign_hungarian(cost, n);
}

PointEstimate from_draw(const PosteriorSamples& samples, std::size_t i) {
  const PosteriorDraw& d = samples.draws[i];
  return {i, d.z, d.w, d.rho, d.tree, d.log_post};
}

}  // namespace

long column_distance(const GenotypeMatrix& a, const GenotypeMatrix& b, int c, int c_other) {
  if (a.pairs() != b.pairs()) throw std::invalid_argument("genotype matrices differ in pairs");
  long s = 0;
  for (int k = 0; k < a.pairs(); ++k) s += nibble_distance(a.index(k, c), b.index(k, c_other));
  return s;
}

ColumnAlignment assign_exhaustive(const std::vector<long>& cost, int n) {
  ColumnAlignment best;
  best.distance = std::numeric_limits<long>::max();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    long s = 0;
    for (int c = 0; c < n; ++c) s += cost[static_cast<std::size_t>(c) * n + perm[static_cast<std::size_t>(c)]];
    if (s < best.distance) {
      best.distance = s;
      best.match = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (n == 0) best.distance = 0;
  return best;
}

ColumnAlignment assign_hungarian(const std::vector<long>& cost, int n) {
  // potentials formulation, 1-based internally
  const long inf = std::numeric_limits<long>::max() / 4;
  std::vector<long> u(static_cast<std::size_t>(n) + 1, 0), v(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  auto a = [&](int i, int j) { return cost[static_cast<std::size_t>(i - 1) * n + (j - 1)]; };
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<long> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      long delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const long cur = a(i0, j) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  ColumnAlignment out;
  out.match.assign(static_cast<std::size_t>(n), 0);
  for (int j = 1; j <= n; ++j) out.match[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  for (int c = 0; c < n; ++c) out.distance += cost[static_cast<std::size_t>(c) * n + out.match[static_cast<std::size_t>(c)]];
  return out;
}

ColumnAlignment align_columns(const GenotypeMatrix& a, const GenotypeMatrix& b) {
  check_shapes(a, b);
  return solve(cost_matrix(a, b), a.subclones());
}

long z_distance(const GenotypeMatrix& a, const GenotypeMatrix& b) { return align_columns(a, b).distance; }

PointEstimate select_point_estimate(const PosteriorSamples& samples, int C, std::size_t cap) {
  std::vector<std::size_t> at_c;
  for (std::size_t i = 0; i < samples.draws.size(); ++i) {
    if (samples.draws[i].C() == C) at_c.push_back(i);
  }
  if (at_c.empty()) throw std::invalid_argument("no posterior draws at C = " + std::to_string(C));
  if (cap > 0 && at_c.size() > cap) {
    std::vector<std::size_t> sub(cap);
    for (std::size_t i = 0; i < cap; ++i) sub[i] = at_c[i * at_c.size() / cap];
    at_c = std::move(sub);
  }
  const std::size_t L = at_c.size();
  std::vector<long> total(L, 0);
  for (std::size_t i = 0; i < L; ++i) {
    const GenotypeMatrix& zi = samples.draws[at_c[i]].z;
    for (std::size_t j = i + 1; j < L; ++j) {
      const long d = z_distance(zi, samples.draws[at_c[j]].z);
      total[i] += d;
      total[j] += d;
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(total.begin(), total.end()) - total.begin());
  return from_draw(samples, at_c[best]);
}

PointEstimate map_estimate(const PosteriorSamples& samples, const TreeTopology& tree) {
  const GenotypeMatrix blank(0, tree.size());
  const TreeTopology target = canonical_labelling(tree, blank).tree;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < samples.draws.size(); ++i) {
    const auto& d = samples.draws[i];
    if (!d.tree || d.tree->size() != tree.size()) continue;
    if (canonical_labelling(*d.tree, d.z).tree != target) continue;
    if (!best || d.log_post > samples.draws[*best].log_post) best = i;
  }
  if (!best) throw std::invalid_argument("no posterior draws with tree " + tree.to_string());
  return from_draw(samples, *best);
}

CPosterior posterior_of_C(const PosteriorSamples& samples) {
  CPosterior out;
  if (samples.draws.empty()) return out;
  for (const auto& d : samples.draws) out.prob[d.C()] += 1.0;
  double best = -1.0;
  for (auto& [c, p] : out.prob) {
    p /= static_cast<double>(samples.draws.size());
    if (p > best) {
      best = p;
      out.mode = c;
    }
  }
  return out;
}

std::vector<TreePosteriorEntry> tree_posterior(const PosteriorSamples& samples) {
  std::map<TreeTopology, double> freq;
  std::size_t n = 0;
  for (const auto& d : samples.draws) {
    if (!d.tree) continue;
    freq[canonical_labelling(*d.tree, d.z).tree] += 1.0;
    ++n;
  }
  std::vector<TreePosteriorEntry> out;
  for (const auto& [t, f] : freq) out.push_back({t, f / static_cast<double>(n)});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.prob > b.prob; });
  return out;
}

CanonicalFit canonical_fit(const TreeTopology& tree, const GenotypeMatrix& z, const Matrix& w) {
  const CanonicalTree ct = canonical_labelling(tree, z);
  std::vector<int> order(ct.new_to_old.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = ct.new_to_old[i] - 1;
  CanonicalFit out{ct.tree, z.permute_columns(order), w};
  for (int t = 0; t < w.rows(); ++t) {
    for (std::size_t i = 0; i < order.size(); ++i) out.w(t, static_cast<int>(i) + 1) = w(t, order[i] + 1);
  }
  return out;
}

long mismatched_entries(const GenotypeMatrix& a, const GenotypeMatrix& b) {
  check_shapes(a, b);
  const int C = a.subclones();
  std::vector<long> cost(static_cast<std::size_t>(C) * C, 0);
  for (int k = 0; k < a.pairs(); ++k) {
    for (int c = 0; c < C; ++c) {
      for (int d = 0; d < C; ++d) cost[static_cast<std::size_t>(c) * C + d] += a.index(k, c) != b.index(k, d);
    }
  }
  return solve(cost, C).distance;
}

Matrix align_weights(const GenotypeMatrix& z, const Matrix& w, const GenotypeMatrix& reference_z) {
  const ColumnAlignment al = align_columns(reference_z, z);
  Matrix out = w;
  for (int t = 0; t < w.rows(); ++t) {
    for (std::size_t c = 0; c < al.match.size(); ++c) out(t, static_cast<int>(c) + 1) = w(t, al.match[c] + 1);
  }
  return out;
}

}  // namespace pairclone
