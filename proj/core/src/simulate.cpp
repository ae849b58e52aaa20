#include "pairclone/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "pairclone/likelihood.hpp"
#include "pairclone/priors.hpp"

namespace pairclone {
namespace {

std::vector<GenotypeBlock> column_blocks(int column, int block, const std::vector<int>& codes) {
  std::vector<GenotypeBlock> out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const int first = static_cast<int>(i) * block + 1;
    out.push_back({first, first + block - 1, column, codes[i]});
  }
  return out;
}

void append(std::vector<GenotypeBlock>& dst, const std::vector<GenotypeBlock>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

SimSpec sim3_like(int K) {
  SimSpec s;
  s.name = K == 100 ? "sim3" : "sim3-k" + std::to_string(K);
  s.T = 6;
  s.K = K;
  s.C = 3;
  const int block = K / 5;
  append(s.blocks, column_blocks(1, block, {4, 1, 6, 2, 7}));
  append(s.blocks, column_blocks(2, block, {1, 6, 3, 4, 4}));
  append(s.blocks, column_blocks(3, block, {6, 4, 1, 9, 2}));
  s.w_concentration = {14, 6, 3};
  s.missing = {{K / 2, 0.3}, {K, 0.35}};
  return s;
}

SimSpec tree_sim(const std::string& name, std::vector<int> parent, int T, int K, std::vector<double> conc) {
  SimSpec s;
  s.name = name;
  s.variant = ModelVariant::tree;
  s.T = T;
  s.K = K;
  s.tree = TreeTopology(std::move(parent));
  s.C = s.tree->size();
  s.w_concentration = std::move(conc);
  s.missing = {{K / 2, 0.25}, {K, 0.3}};
  return s;
}

}  // namespace

void SimSpec::validate() const {
  if (T < 1 || K < 0 || C < 1 || snvs < 0 || K + snvs < 1) throw std::invalid_argument("bad simulation dimensions");
  if (n_lo < 1 || n_hi < n_lo) throw std::invalid_argument("bad read-depth range");
  if (n_override && *n_override < 0) throw std::invalid_argument("negative read depth");
  if (variant == ModelVariant::tree) {
    if (!tree || tree->size() != C) throw std::invalid_argument("tree simulation needs a tree with C nodes");
  }
  for (const auto& b : blocks) {
    if (b.first < 1 || b.last > K + snvs || b.first > b.last || b.column < 1 || b.column > C || b.code < 1 ||
        b.code > kNumGenotypes) {
      throw std::invalid_argument("genotype block out of range");
    }
  }
  const int J = C + 1 + (variant == ModelVariant::purity ? 1 : 0);
  if (!w_rows.empty()) {
    if (static_cast<int>(w_rows.size()) != T) throw std::invalid_argument("need one weight row per sample");
    for (const auto& r : w_rows) {
      if (static_cast<int>(r.size()) != J) throw std::invalid_argument("weight row has the wrong length");
    }
  } else if (static_cast<int>(w_concentration.size()) != J - 1) {
    throw std::invalid_argument("need one weight concentration per non-background component");
  }
  for (const auto& m : missing) {
    if (!(m.v >= 0.0 && m.v <= 0.5)) throw std::invalid_argument("missing rate must lie in [0, 0.5]");
  }
  if (missing.empty() || missing.back().last < K) throw std::invalid_argument("missing rates do not cover all pairs");
}

SimData generate(const SimSpec& spec, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  return generate(spec, rng);
}

SimData generate(const SimSpec& spec, Rng& rng) {
  spec.validate();
  const int rows = spec.rows();
  SimData out;
  out.pairs = spec.K;
  out.snvs = spec.snvs;
  SimTruth& truth = out.truth;

  if (spec.tree && spec.blocks.empty()) {
    const double lambda = spec.lambda > 0.0 ? spec.lambda : 2.0 * rows / spec.C;
    truth.z = sample_Z_given_tree(*spec.tree, rows, lambda, rng);
  } else {
    truth.z = GenotypeMatrix(rows, spec.C);
    for (const auto& b : spec.blocks) {
      for (int k = b.first; k <= b.last; ++k) truth.z.set(k - 1, b.column - 1, GenotypeCode(b.code));
    }
  }
  truth.tree = spec.tree;

  const int J = spec.C + 1 + (spec.variant == ModelVariant::purity ? 1 : 0);
  truth.w = Matrix(spec.T, J);
  for (int t = 0; t < spec.T; ++t) {
    if (!spec.w_rows.empty()) {
      const auto& r = spec.w_rows[static_cast<std::size_t>(t)];
      std::copy(r.begin(), r.end(), truth.w.row(t).begin());
      continue;
    }
    std::vector<double> conc = spec.w_concentration;
    std::shuffle(conc.begin(), conc.end(), rng);
    conc.insert(conc.begin(), spec.w_background);
    std::vector<double> lw(conc.size());
    log_dirichlet_variate(conc, lw, rng);
    for (int j = 0; j < J; ++j) truth.w(t, j) = std::exp(lw[static_cast<std::size_t>(j)]);
  }

  if (spec.rho) {
    truth.rho = *spec.rho;
  } else {
    std::array<double, kNumOutcomes> star{};
    sample_log_rho_star(star, spec.d1, rng);
    truth.rho = rho_from_log_star(star);
  }

  truth.p_tilde = conditional_read_probs(truth.z, truth.w, truth.rho);
  truth.p_hat = ProbTable(spec.T, rows);
  truth.v.assign(static_cast<std::size_t>(rows), 1.0);
  for (int k = 0; k < spec.K; ++k) {
    for (const auto& m : spec.missing) {
      if (k + 1 <= m.last) {
        truth.v[static_cast<std::size_t>(k)] = m.v;
        break;
      }
    }
  }
  for (int t = 0; t < spec.T; ++t) {
    for (int k = 0; k < rows; ++k) {
      std::array<double, 3> cls{};
      if (k < spec.K) {
        const double v = truth.v[static_cast<std::size_t>(k)];
        cls = {1.0 - 2.0 * v, v, v};
      } else {
        cls = {0.0, 0.0, 1.0};
      }
      const auto pt = truth.p_tilde.cell(t, k);
      auto ph = truth.p_hat.cell(t, k);
      for (int g = 0; g < kNumOutcomes; ++g) {
        ph[static_cast<std::size_t>(g)] = cls[static_cast<std::size_t>(rho_group(g))] * pt[static_cast<std::size_t>(g)];
      }
    }
  }

  out.counts = ReadCounts(spec.T, rows);
  std::uniform_int_distribution<long> depth(spec.n_lo, spec.n_hi);
  for (int t = 0; t < spec.T; ++t) {
    for (int k = 0; k < rows; ++k) {
      const long n = spec.n_override ? *spec.n_override : depth(rng);
      multinomial_variate(n, truth.p_hat.cell(t, k), out.counts.cell(t, k), rng);
    }
  }
  return out;
}

std::vector<std::string> preset_names() {
  return {"sim1", "sim2", "sim3", "sim3-k40", "purity", "tree-sim1", "tree-sim1-2000x", "tree-sim2", "tree-sim2-k50",
          "lung"};
}

SimSpec preset(const std::string& name) {
  if (name == "sim1") {
    SimSpec s;
    s.name = name;
    s.T = 1;
    s.K = 40;
    s.C = 2;
    s.blocks = {{11, 30, 1, 4}, {1, 20, 2, 6}};
    s.w_rows = {{1e-7, 0.8, 0.2}};
    s.missing = {{40, 0.3}};
    return s;
  }
  if (name == "sim2") {
    SimSpec s;
    s.name = name;
    s.T = 4;
    s.K = 100;
    s.C = 4;
    append(s.blocks, column_blocks(1, 20, {4, 1, 6, 2, 1}));
    append(s.blocks, column_blocks(2, 20, {1, 6, 3, 7, 4}));
    append(s.blocks, column_blocks(3, 20, {2, 2, 1, 4, 6}));
    append(s.blocks, column_blocks(4, 20, {10, 5, 8, 1, 9}));
    s.w_concentration = {20, 10, 5, 2};
    s.missing = {{50, 0.3}, {100, 0.35}};
    return s;
  }
  if (name == "sim3") return sim3_like(100);
  if (name == "sim3-k40") return sim3_like(40);
  if (name == "purity") {
    // sim3 with its first subclone replaced by the normal clone
    SimSpec s = sim3_like(100);
    s.name = name;
    s.variant = ModelVariant::purity;
    s.C = 2;
    s.blocks.clear();
    append(s.blocks, column_blocks(1, 20, {1, 6, 3, 4, 4}));
    append(s.blocks, column_blocks(2, 20, {6, 4, 1, 9, 2}));
    return s;
  }
  if (name == "tree-sim1") return tree_sim(name, {0, 1, 1, 2}, 1, 100, {15, 10, 8, 5});
  if (name == "tree-sim1-2000x") {
    SimSpec s = tree_sim(name, {0, 1, 1, 2}, 1, 100, {15, 10, 8, 5});
    s.n_lo = 1900;
    s.n_hi = 2100;
    return s;
  }
  if (name == "tree-sim2") return tree_sim(name, {0, 1, 2, 2, 3}, 8, 100, {25, 15, 10, 8, 5});
  if (name == "tree-sim2-k50") return tree_sim(name, {0, 1, 2, 2, 3}, 8, 50, {25, 15, 10, 8, 5});
  if (name == "lung") {
    SimSpec s;
    s.name = name;
    s.variant = ModelVariant::purity;
    s.T = 4;
    s.K = 69;
    s.snvs = 69;
    s.C = 2;
    s.blocks = {{1, 20, 1, 4},  {21, 45, 1, 2},  {70, 110, 1, 3},
                {1, 20, 2, 4},  {36, 69, 2, 6},  {91, 138, 2, 3}};
    s.w_concentration = {12, 6, 4};
    s.missing = {{69, 0.3}};
    return s;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

RatesReport empirical_rates_check(const ReadCounts& counts, const SimTruth& truth) {
  if (counts.samples() != truth.p_hat.samples() || counts.pairs() != truth.p_hat.pairs()) {
    throw std::invalid_argument("counts and truth differ in shape");
  }
  RatesReport r;
  for (int t = 0; t < counts.samples(); ++t) {
    for (int k = 0; k < counts.pairs(); ++k) {
      const double n = counts.total(t, k);
      if (n <= 0.0) continue;
      const auto p = truth.p_hat.cell(t, k);
      for (int g = 0; g < kNumOutcomes; ++g) {
        const double pg = p[static_cast<std::size_t>(g)];
        const double f = counts(t, k, g) / n;
        if (pg <= 0.0 && counts(t, k, g) > 0.0) r.zero_mass_violated = true;
        r.max_abs_deviation = std::max(r.max_abs_deviation, std::abs(f - pg));
        if (pg > 0.0 && pg < 1.0) {
          r.max_standardized = std::max(r.max_standardized, std::abs(f - pg) / std::sqrt(pg * (1.0 - pg) / n));
        }
      }
    }
  }
  return r;
}

}  // namespace pairclone
