#include "pairclone/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pairclone/likelihood.hpp"

namespace pairclone {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double normal_step(Rng& rng, double sd) { return std::normal_distribution<double>(0.0, sd)(rng); }

bool accept(double log_ratio, Rng& rng) {
  const double u = uniform01(rng);
  if (std::isnan(log_ratio)) return false;
  return log_ratio >= 0.0 || std::log(u) < log_ratio;
}

// Level of A(h_g, z) in {0, 1/2, 1}.
int match_level(double a) { return static_cast<int>(2.0 * a + 0.25); }

// Match probability of genotype q and outcome g as a level 0, 1 or 2 (A = level / 2).
using LevelTable = std::array<std::array<int, kNumOutcomes>, kNumGenotypes>;

const LevelTable& level_table() {
  static const LevelTable table = [] {
    LevelTable t{};
    const auto& A = match_table();
    for (int q = 0; q < kNumGenotypes; ++q) {
      for (int g = 0; g < kNumOutcomes; ++g) t[static_cast<std::size_t>(q)][static_cast<std::size_t>(g)] = match_level(A[static_cast<std::size_t>(q)][static_cast<std::size_t>(g)]);
    }
    return t;
  }();
  return table;
}

}  // namespace

std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::flat: return "flat";
    case ModelVariant::purity: return "purity";
    case ModelVariant::tree: return "tree";
  }
  return "flat";
}

ModelVariant parse_model_variant(const std::string& name) {
  if (name == "flat") return ModelVariant::flat;
  if (name == "purity") return ModelVariant::purity;
  if (name == "tree") return ModelVariant::tree;
  throw std::invalid_argument("unknown model variant '" + name + "'");
}

int ModelSpec::weight_width(int C) const { return C + 1 + (variant == ModelVariant::purity ? 1 : 0); }

WeightPrior ModelSpec::weight_prior(int C) const {
  const auto& h = hyper;
  switch (variant) {
    case ModelVariant::flat: return WeightPrior::flat(C, h.d0, h.d);
    case ModelVariant::purity: return WeightPrior::purity(C, h.d0, h.d, h.d1_star, h.d2_star);
    case ModelVariant::tree: {
      const double a_p = tree.a_p > 0.0 ? tree.a_p : h.d;
      const double b_p = tree.b_p > 0.0 ? tree.b_p : h.d0 + (C - 1) * h.d;
      return WeightPrior::tree(C, h.d0, h.d, a_p, b_p);
    }
  }
  throw std::logic_error("unreachable");
}

double ModelSpec::lambda(int pairs, int C) const {
  return tree.lambda > 0.0 ? tree.lambda : 2.0 * pairs / C;
}

Matrix ChainState::weights() const {
  Matrix w(log_theta.rows(), log_theta.cols());
  for (int t = 0; t < w.rows(); ++t) {
    const auto row = log_theta_to_w(log_theta.row(t));
    std::copy(row.begin(), row.end(), w.row(t).begin());
  }
  return w;
}

NoiseVector ChainState::rho() const { return rho_from_log_star(log_rho_star); }

// ---------------------------------------------------------------------------

Chain::Chain(const ModelSpec& spec, const ReadCounts& data, double temperature, Rng rng)
    : spec_(&spec), data_(&data), temperature_(temperature), rng_(std::move(rng)) {
  set_temperature(temperature);
}

void Chain::set_temperature(double t) {
  if (!(t > 0.0)) throw std::invalid_argument("temperature must be positive");
  temperature_ = t;
}

void Chain::init_from_prior(int C, const TreeTopology* tree) {
  const int K = data_->pairs();
  const int T = data_->samples();
  ChainState s;
  if (spec_->is_tree()) {
    if (tree == nullptr || tree->size() != C) throw std::invalid_argument("tree model needs a tree with C nodes");
    s.tree = *tree;
    s.z = sample_Z_given_tree(*tree, K, spec_->lambda(K, C), rng_);
  } else {
    if (C < 1) throw std::invalid_argument("C must be at least 1");
    s.z = GenotypeMatrix(K, C);
    s.log_pi = Matrix(C, kNumGenotypes);
    const BetaDirichlet bd{spec_->hyper.alpha / C, spec_->hyper.gamma};
    for (int c = 0; c < C; ++c) {
      bd.sample_log(s.log_pi.row(c), rng_);
      for (int k = 0; k < K; ++k) {
        s.z.set(k, c, GenotypeCode::from_index(sample_log_categorical(s.log_pi.row(c), rng_)));
      }
    }
  }
  const WeightPrior wp = spec_->weight_prior(C);
  s.log_theta = Matrix(T, wp.size());
  // Redraw weights and noise until the data have positive likelihood; only
  // matters for starting values.
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (int t = 0; t < T; ++t) wp.sample_log_theta(s.log_theta.row(t), rng_);
    sample_log_rho_star(s.log_rho_star, spec_->hyper.d1, rng_);
    set_state(s);
    if (std::isfinite(loglik_)) return;
  }
}

void Chain::set_state(ChainState state) {
  const int C = state.C();
  if (state.z.pairs() != data_->pairs()) throw std::invalid_argument("state has the wrong number of pairs");
  if (state.log_theta.rows() != data_->samples()) throw std::invalid_argument("state has the wrong number of samples");
  if (state.log_theta.cols() != spec_->weight_width(C)) throw std::invalid_argument("weight row width mismatch");
  if (spec_->is_tree()) {
    if (!state.tree || state.tree->size() != C) throw std::invalid_argument("tree state needs a matching tree");
    tpois_.emplace(spec_->lambda(data_->pairs(), C), data_->pairs());
  } else {
    if (state.log_pi.rows() != C || state.log_pi.cols() != kNumGenotypes) {
      throw std::invalid_argument("pi table shape mismatch");
    }
    tpois_.reset();
  }
  state_ = std::move(state);
  wprior_ = spec_->weight_prior(C);
  refresh();
}

void Chain::rebind(const ReadCounts& data) {
  if (data.pairs() != data_->pairs() || data.samples() != data_->samples()) {
    throw std::invalid_argument("rebinding to data of a different shape");
  }
  data_ = &data;
  refresh();
}

void Chain::refresh() {
  const int T = data_->samples();
  w_ = state_.weights();
  rho_ = state_.rho();
  probs_ = conditional_read_probs(state_.z, w_, rho_);
  loglik_t_.assign(static_cast<std::size_t>(T), 0.0);
  loglik_ = 0.0;
  for (int t = 0; t < T; ++t) {
    loglik_t_[static_cast<std::size_t>(t)] = sample_loglik(t, probs_);
    loglik_ += loglik_t_[static_cast<std::size_t>(t)];
  }
  if (spec_->is_tree()) recompute_tree_prior();
}

void Chain::recompute_tree_prior() { log_prior_z_tree_ = log_prior_Z_given_tree(state_.z, *state_.tree, *tpois_); }

double Chain::sample_loglik(int t, const ProbTable& p) const {
  double s = 0.0;
  for (int k = 0; k < data_->pairs(); ++k) {
    const auto n = data_->cell(t, k);
    const auto q = p.cell(t, k);
    for (int g = 0; g < kNumOutcomes; ++g) {
      if (n[g] > 0.0) s += n[g] * std::log(q[g]);
    }
  }
  return s;
}

double Chain::log_prior_pi() const {
  const int C = state_.C();
  const double a = spec_->hyper.alpha / C;
  const std::vector<double> conc(kNumGenotypes - 1, spec_->hyper.gamma);
  double lp = 0.0;
  std::vector<double> tilde(kNumGenotypes - 1);
  for (int c = 0; c < C; ++c) {
    const auto row = state_.log_pi.row(c);
    const double log_rest = log_sum_exp(row.subspan(1));
    lp += std::lgamma(1.0 + a) - std::lgamma(a) + (a - 1.0) * log_rest;
    for (int q = 1; q < kNumGenotypes; ++q) tilde[static_cast<std::size_t>(q - 1)] = row[static_cast<std::size_t>(q)] - log_rest;
    lp += dirichlet_logpdf_log(tilde, conc);
  }
  return lp;
}

double Chain::log_prior_theta_row(int t) const {
  const auto row = state_.log_theta.row(t);
  double lp = wprior_.log_density_log_theta(row);
  for (std::size_t j = 0; j < row.size(); ++j) lp -= row[j] + std::lgamma(wprior_.conc[j]);
  return lp;
}

double Chain::log_prior_rho_star() const {
  const auto shapes = rho_star_shapes(spec_->hyper.d1);
  double lp = 0.0;
  for (int g = 0; g < kNumOutcomes; ++g) {
    const double phi = state_.log_rho_star[static_cast<std::size_t>(g)];
    lp += (shapes[static_cast<std::size_t>(g)] - 1.0) * phi - std::exp(phi) - std::lgamma(shapes[static_cast<std::size_t>(g)]);
  }
  return lp;
}

double Chain::log_prior() const {
  double lp = log_prior_rho_star();
  for (int t = 0; t < data_->samples(); ++t) lp += log_prior_theta_row(t);
  if (spec_->is_tree()) {
    lp += log_prior_z_tree_;
  } else {
    lp += log_prior_Z_given_pi(state_.z, state_.log_pi) + log_prior_pi();
  }
  return lp;
}

void Chain::sweep() {
  if (spec_->is_tree()) {
    update_Z_rows();
  } else {
    update_Z();
    update_pi();
  }
  update_theta();
  update_rho_star();
}

// --- flat Z ----------------------------------------------------------------

void Chain::update_Z() {
  const int C = state_.C();
  for (int k = 0; k < state_.z.pairs(); ++k) {
    for (int c = 0; c < C; ++c) update_Z_entry(k, c);
  }
  if (spec_->pair_block_z && C >= 2) {
    std::uniform_int_distribution<int> first(0, C - 1);
    std::uniform_int_distribution<int> second(0, C - 2);
    for (int k = 0; k < state_.z.pairs(); ++k) {
      const int c1 = first(rng_);
      int c2 = second(rng_);
      if (c2 >= c1) ++c2;
      update_Z_pair(k, c1, c2);
    }
  }
  refresh();
}

void Chain::update_Z_pair(int k, int c1, int c2) {
  const auto& A = match_table();
  const int T = data_->samples();
  const int C = state_.C();
  const bool purity = w_.cols() == C + 2;
  constexpr int kQ2 = kNumGenotypes * kNumGenotypes;
  std::array<double, kQ2> logw{};
  // Sum over samples of n_tkg log p for each pair of match levels.
  std::array<std::array<double, 9>, kNumOutcomes> level_ll{};
  std::vector<std::array<double, kNumOutcomes>> base(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    auto& b = base[static_cast<std::size_t>(t)];
    const double w0 = w_(t, 0);
    for (int g = 0; g < kNumOutcomes; ++g) b[static_cast<std::size_t>(g)] = w0 * rho_[static_cast<std::size_t>(g)];
    for (int cc = 0; cc < C; ++cc) {
      if (cc == c1 || cc == c2) continue;
      const auto& a = A[static_cast<std::size_t>(state_.z.index(k, cc))];
      const double wc = w_(t, cc + 1);
      for (int g = 0; g < kNumOutcomes; ++g) b[static_cast<std::size_t>(g)] += wc * a[static_cast<std::size_t>(g)];
    }
    if (purity) {
      const double wn = w_(t, C + 1);
      for (int g = 0; g < kNumOutcomes; ++g) b[static_cast<std::size_t>(g)] += wn * A[0][static_cast<std::size_t>(g)];
    }
    const double w1 = w_(t, c1 + 1);
    const double w2 = w_(t, c2 + 1);
    const auto n = data_->cell(t, k);
    for (int g = 0; g < kNumOutcomes; ++g) {
      const double ng = n[static_cast<std::size_t>(g)];
      if (ng <= 0.0) continue;
      const double bg = b[static_cast<std::size_t>(g)];
      auto& sg = level_ll[static_cast<std::size_t>(g)];
      for (int l1 = 0; l1 < 3; ++l1) {
        for (int l2 = 0; l2 < 3; ++l2) sg[static_cast<std::size_t>(3 * l1 + l2)] += ng * std::log(bg + 0.5 * (l1 * w1 + l2 * w2));
      }
    }
  }
  const auto& L = level_table();
  for (int q1 = 0; q1 < kNumGenotypes; ++q1) {
    for (int q2 = 0; q2 < kNumGenotypes; ++q2) {
      double s = 0.0;
      for (int g = 0; g < kNumOutcomes; ++g) {
        const auto l = static_cast<std::size_t>(3 * L[static_cast<std::size_t>(q1)][static_cast<std::size_t>(g)] + L[static_cast<std::size_t>(q2)][static_cast<std::size_t>(g)]);
        s += level_ll[static_cast<std::size_t>(g)][l];
      }
      logw[static_cast<std::size_t>(q1 * kNumGenotypes + q2)] = s;
    }
  }
  for (int q1 = 0; q1 < kNumGenotypes; ++q1) {
    for (int q2 = 0; q2 < kNumGenotypes; ++q2) {
      auto& lw = logw[static_cast<std::size_t>(q1 * kNumGenotypes + q2)];
      lw = (lw + state_.log_pi(c1, q1) + state_.log_pi(c2, q2)) / temperature_;
    }
  }
  const int pick = sample_log_categorical(logw, rng_);
  const int q1 = pick / kNumGenotypes;
  const int q2 = pick % kNumGenotypes;
  state_.z.set(k, c1, GenotypeCode::from_index(q1));
  state_.z.set(k, c2, GenotypeCode::from_index(q2));
  const auto& a1 = A[static_cast<std::size_t>(q1)];
  const auto& a2 = A[static_cast<std::size_t>(q2)];
  for (int t = 0; t < T; ++t) {
    auto p = probs_.cell(t, k);
    const double w1 = w_(t, c1 + 1);
    const double w2 = w_(t, c2 + 1);
    const auto& b = base[static_cast<std::size_t>(t)];
    for (int g = 0; g < kNumOutcomes; ++g) {
      p[static_cast<std::size_t>(g)] = b[static_cast<std::size_t>(g)] + w1 * a1[static_cast<std::size_t>(g)] + w2 * a2[static_cast<std::size_t>(g)];
    }
  }
}

void Chain::update_Z_entry(int k, int c) {
  const auto& A = match_table();
  const int T = data_->samples();
  const int C = state_.C();
  const bool purity = w_.cols() == C + 2;
  std::array<double, kNumGenotypes> logw{};
  std::array<std::array<double, 3>, kNumOutcomes> level_ll{};
  std::vector<std::array<double, kNumOutcomes>> base(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    auto& b = base[static_cast<std::size_t>(t)];
    const double w0 = w_(t, 0);
    for (int g = 0; g < kNumOutcomes; ++g) b[static_cast<std::size_t>(g)] = w0 * rho_[static_cast<std::size_t>(g)];
    for (int cc = 0; cc < C; ++cc) {
      if (cc == c) continue;
      const auto& a = A[static_cast<std::size_t>(state_.z.index(k, cc))];
      const double wc = w_(t, cc + 1);
      for (int g = 0; g < kNumOutcomes; ++g) b[static_cast<std::size_t>(g)] += wc * a[static_cast<std::size_t>(g)];
    }
    if (purity) {
      const auto& a = A[0];
      const double wn = w_(t, C + 1);
      for (int g = 0; g < kNumOutcomes; ++g) b[static_cast<std::size_t>(g)] += wn * a[static_cast<std::size_t>(g)];
    }
    const double wc = w_(t, c + 1);
    const auto n = data_->cell(t, k);
    for (int g = 0; g < kNumOutcomes; ++g) {
      const double ng = n[static_cast<std::size_t>(g)];
      if (ng <= 0.0) continue;
      const double bg = b[static_cast<std::size_t>(g)];
      auto& sg = level_ll[static_cast<std::size_t>(g)];
      sg[0] += ng * std::log(bg);
      sg[1] += ng * std::log(bg + 0.5 * wc);
      sg[2] += ng * std::log(bg + wc);
    }
  }
  const auto& L = level_table();
  for (int q = 0; q < kNumGenotypes; ++q) {
    double s = 0.0;
    for (int g = 0; g < kNumOutcomes; ++g) {
      s += level_ll[static_cast<std::size_t>(g)][static_cast<std::size_t>(L[static_cast<std::size_t>(q)][static_cast<std::size_t>(g)])];
    }
    logw[static_cast<std::size_t>(q)] = (s + state_.log_pi(c, q)) / temperature_;
  }
  const int q_new = sample_log_categorical(logw, rng_);
  state_.z.set(k, c, GenotypeCode::from_index(q_new));
  const auto& a = A[static_cast<std::size_t>(q_new)];
  for (int t = 0; t < T; ++t) {
    auto p = probs_.cell(t, k);
    const double wc = w_(t, c + 1);
    const auto& b = base[static_cast<std::size_t>(t)];
    for (int g = 0; g < kNumOutcomes; ++g) p[static_cast<std::size_t>(g)] = b[static_cast<std::size_t>(g)] + wc * a[static_cast<std::size_t>(g)];
  }
}

void Chain::update_pi() {
  const int C = state_.C();
  const int K = state_.z.pairs();
  const double a_over_c = spec_->hyper.alpha / C;
  const double gamma = spec_->hyper.gamma;
  const double inv = 1.0 / temperature_;
  const Matrix m = code_counts(state_.z);
  std::vector<double> conc(kNumGenotypes - 1);
  std::vector<double> tilde(kNumGenotypes - 1);
  for (int c = 0; c < C; ++c) {
    const double m1 = m(c, 0);
    const double a = m1 * inv + 1.0;
    const double b = (K - m1 + a_over_c - 1.0) * inv + 1.0;
    const double g1 = log_gamma_variate(a, rng_);
    const double g2 = log_gamma_variate(b, rng_);
    const double pair[2] = {g1, g2};
    const double norm = log_sum_exp(pair);
    const double log_rest = g2 - norm;
    for (int q = 1; q < kNumGenotypes; ++q) conc[static_cast<std::size_t>(q - 1)] = (m(c, q) + gamma - 1.0) * inv + 1.0;
    log_dirichlet_variate(conc, tilde, rng_);
    state_.log_pi(c, 0) = g1 - norm;
    for (int q = 1; q < kNumGenotypes; ++q) state_.log_pi(c, q) = log_rest + tilde[static_cast<std::size_t>(q - 1)];
  }
}

// --- weights and noise -------------------------------------------------------

void Chain::update_theta() {
  const auto& A = match_table();
  const int T = data_->samples();
  const int K = data_->pairs();
  const int C = state_.C();
  const int J = state_.log_theta.cols();
  const bool purity = J == C + 2;
  std::vector<double> proposal(static_cast<std::size_t>(J));
  std::vector<double> p_new(static_cast<std::size_t>(K) * kNumOutcomes);
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < J; ++j) {
      const auto current = state_.log_theta.row(t);
      std::copy(current.begin(), current.end(), proposal.begin());
      const double step = normal_step(rng_, spec_->theta_step);
      proposal[static_cast<std::size_t>(j)] += step;
      const auto w = log_theta_to_w(proposal);
      double ll = 0.0;
      for (int k = 0; k < K; ++k) {
        double* p = p_new.data() + static_cast<std::size_t>(k) * kNumOutcomes;
        for (int g = 0; g < kNumOutcomes; ++g) p[g] = w[0] * rho_[static_cast<std::size_t>(g)];
        for (int c = 0; c < C; ++c) {
          const auto& a = A[static_cast<std::size_t>(state_.z.index(k, c))];
          const double wc = w[static_cast<std::size_t>(c + 1)];
          for (int g = 0; g < kNumOutcomes; ++g) p[g] += wc * a[static_cast<std::size_t>(g)];
        }
        if (purity) {
          const double wn = w[static_cast<std::size_t>(C + 1)];
          for (int g = 0; g < kNumOutcomes; ++g) p[g] += wn * A[0][static_cast<std::size_t>(g)];
        }
        const auto n = data_->cell(t, k);
        for (int g = 0; g < kNumOutcomes; ++g) {
          if (n[static_cast<std::size_t>(g)] > 0.0) ll += n[static_cast<std::size_t>(g)] * std::log(p[g]);
        }
      }
      const double lp_old = wprior_.log_density_log_theta(current) - std::accumulate(current.begin(), current.end(), 0.0);
      const double lp_new = wprior_.log_density_log_theta(proposal) - std::accumulate(proposal.begin(), proposal.end(), 0.0);
      double log_r = (lp_new + ll - lp_old - loglik_t_[static_cast<std::size_t>(t)]) / temperature_;
      if (!spec_->broken_jacobian) log_r += step;
      ++theta_stats_.proposed;
      if (!accept(log_r, rng_)) continue;
      ++theta_stats_.accepted;
      std::copy(proposal.begin(), proposal.end(), state_.log_theta.row(t).begin());
      std::copy(w.begin(), w.end(), w_.row(t).begin());
      for (int k = 0; k < K; ++k) {
        auto cell = probs_.cell(t, k);
        std::copy_n(p_new.data() + static_cast<std::size_t>(k) * kNumOutcomes, kNumOutcomes, cell.begin());
      }
      loglik_ += ll - loglik_t_[static_cast<std::size_t>(t)];
      loglik_t_[static_cast<std::size_t>(t)] = ll;
    }
  }
}

void Chain::update_rho_star() {
  const int T = data_->samples();
  const int K = data_->pairs();
  const auto shapes = rho_star_shapes(spec_->hyper.d1);
  static constexpr std::array<std::pair<int, int>, 3> kGroups = {{{0, 4}, {4, 6}, {6, 8}}};
  std::vector<double> p_new;
  std::vector<double> ll_t(static_cast<std::size_t>(T));
  for (int g0 = 0; g0 < kNumOutcomes; ++g0) {
    const auto [lo, hi] = kGroups[static_cast<std::size_t>(rho_group(g0))];
    const int width = hi - lo;
    auto proposal = state_.log_rho_star;
    const double step = normal_step(rng_, spec_->rho_step);
    proposal[static_cast<std::size_t>(g0)] += step;
    const NoiseVector rho_new = rho_from_log_star(proposal);
    p_new.assign(static_cast<std::size_t>(T) * K * width, 0.0);
    double dll = 0.0;
    for (int t = 0; t < T; ++t) {
      const double w0 = w_(t, 0);
      double d = 0.0;
      for (int k = 0; k < K; ++k) {
        const auto n = data_->cell(t, k);
        const auto p = probs_.cell(t, k);
        for (int g = lo; g < hi; ++g) {
          const double v = p[static_cast<std::size_t>(g)] + w0 * (rho_new[static_cast<std::size_t>(g)] - rho_[static_cast<std::size_t>(g)]);
          p_new[(static_cast<std::size_t>(t) * K + k) * width + (g - lo)] = v;
          const double ng = n[static_cast<std::size_t>(g)];
          if (ng > 0.0) d += ng * (v > 0.0 ? std::log(v) - std::log(p[static_cast<std::size_t>(g)]) : kNegInf);
        }
      }
      ll_t[static_cast<std::size_t>(t)] = d;
      dll += d;
    }
    const double phi_old = state_.log_rho_star[static_cast<std::size_t>(g0)];
    const double phi_new = proposal[static_cast<std::size_t>(g0)];
    const double shape = shapes[static_cast<std::size_t>(g0)];
    const double dlp = (shape - 1.0) * (phi_new - phi_old) - (std::exp(phi_new) - std::exp(phi_old));
    const double log_r = (dlp + dll) / temperature_ + step;
    ++rho_stats_.proposed;
    if (!accept(log_r, rng_)) continue;
    ++rho_stats_.accepted;
    state_.log_rho_star = proposal;
    rho_ = rho_new;
    for (int t = 0; t < T; ++t) {
      for (int k = 0; k < K; ++k) {
        auto p = probs_.cell(t, k);
        for (int g = lo; g < hi; ++g) {
          p[static_cast<std::size_t>(g)] = p_new[(static_cast<std::size_t>(t) * K + k) * width + (g - lo)];
        }
      }
      loglik_t_[static_cast<std::size_t>(t)] += ll_t[static_cast<std::size_t>(t)];
    }
    loglik_ += dll;
  }
}

// --- tree Z ------------------------------------------------------------------

namespace {

struct TreeRowTables {
  std::array<std::array<double, kNumGenotypes>, kNumGenotypes> log_gain{};
  std::array<int, kNumGenotypes> free{};

  TreeRowTables() {
    for (int p = 0; p < kNumGenotypes; ++p) {
      free[static_cast<std::size_t>(p)] = free_slots(GenotypeCode::from_index(p));
      for (int q = 0; q < kNumGenotypes; ++q) {
        log_gain[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] =
            log_gain_prob(GenotypeCode::from_index(p), GenotypeCode::from_index(q));
      }
    }
  }
};

const TreeRowTables& tree_tables() {
  static const TreeRowTables tables;
  return tables;
}

}  // namespace

void Chain::update_Z_rows() {
  for (int k = 0; k < state_.z.pairs(); ++k) update_Z_row(k);
  refresh();
}

void Chain::update_Z_row(int k) {
  const auto& A = match_table();
  const auto& tab = tree_tables();
  const TreeTopology& tree = *state_.tree;
  const int C = tree.size();
  const int K = state_.z.pairs();
  const int T = data_->samples();
  const auto& order = tree.order();

  // Column statistics without row k: new mutations gained by each node and
  // pairs with a free slot in each node (as a parent).
  std::vector<int> gains(static_cast<std::size_t>(C), 0);
  std::vector<int> eligible(static_cast<std::size_t>(C), 0);
  for (int kk = 0; kk < K; ++kk) {
    if (kk == k) continue;
    for (int c = 0; c < C; ++c) {
      const int code = state_.z.index(kk, c);
      if (tab.free[static_cast<std::size_t>(code)] > 0) ++eligible[static_cast<std::size_t>(c)];
      if (c > 0 && code != state_.z.index(kk, tree.parent(c + 1) - 1)) ++gains[static_cast<std::size_t>(c)];
    }
  }

  const auto n_levels = order.size();
  std::vector<double> partial((n_levels + 1) * static_cast<std::size_t>(T) * kNumOutcomes);
  auto level_ptr = [&](std::size_t level) { return partial.data() + level * static_cast<std::size_t>(T) * kNumOutcomes; };
  {
    double* p0 = level_ptr(0);
    for (int t = 0; t < T; ++t) {
      for (int g = 0; g < kNumOutcomes; ++g) p0[t * kNumOutcomes + g] = w_(t, 0) * rho_[static_cast<std::size_t>(g)];
    }
  }

  std::vector<std::uint8_t> row(static_cast<std::size_t>(C), 0);
  std::vector<std::uint8_t> rows;
  std::vector<double> logw;
  const double inv = 1.0 / temperature_;

  auto descend = [&](auto&& self, std::size_t level, double log_prior) -> void {
    if (level == n_levels) {
      const double* p = level_ptr(level);
      double ll = 0.0;
      for (int t = 0; t < T; ++t) {
        const auto n = data_->cell(t, k);
        for (int g = 0; g < kNumOutcomes; ++g) {
          if (n[static_cast<std::size_t>(g)] > 0.0) ll += n[static_cast<std::size_t>(g)] * std::log(p[t * kNumOutcomes + g]);
        }
      }
      rows.insert(rows.end(), row.begin(), row.end());
      logw.push_back((ll + log_prior) * inv);
      return;
    }
    const int node = order[level];
    const int c = node - 1;
    auto place = [&](int code, double term) {
      row[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(code);
      const double* src = level_ptr(level);
      double* dst = level_ptr(level + 1);
      const auto& a = A[static_cast<std::size_t>(code)];
      for (int t = 0; t < T; ++t) {
        const double wc = w_(t, c + 1);
        for (int g = 0; g < kNumOutcomes; ++g) {
          dst[t * kNumOutcomes + g] = src[t * kNumOutcomes + g] + wc * a[static_cast<std::size_t>(g)];
        }
      }
      self(self, level + 1, log_prior + term);
    };
    if (node == 1) {
      place(kReferenceGenotype.index(), 0.0);
      return;
    }
    const int pc = tree.parent(node) - 1;
    const int parent_code = row[static_cast<std::size_t>(pc)];
    const int upper = eligible[static_cast<std::size_t>(pc)] + (tab.free[static_cast<std::size_t>(parent_code)] > 0 ? 1 : 0);
    const int base_gain = gains[static_cast<std::size_t>(c)];
    if (base_gain >= 1) {
      const double term = tpois_->logpmf(base_gain, upper) - log_choose(upper, base_gain);
      if (std::isfinite(term)) place(parent_code, term);
    }
    for (std::uint8_t q : gain_targets(GenotypeCode::from_index(parent_code))) {
      const int m = base_gain + 1;
      const double term = tpois_->logpmf(m, upper) - log_choose(upper, m) +
                          tab.log_gain[static_cast<std::size_t>(parent_code)][q];
      if (std::isfinite(term)) place(q, term);
    }
  };
  descend(descend, 0, 0.0);
  if (logw.empty()) throw std::logic_error("empty admissible set in tree row update");

  const int pick = sample_log_categorical(logw, rng_);
  const std::uint8_t* chosen = rows.data() + static_cast<std::size_t>(pick) * C;
  for (int c = 0; c < C; ++c) state_.z.set(k, c, GenotypeCode::from_index(chosen[c]));
  for (int t = 0; t < T; ++t) {
    auto p = probs_.cell(t, k);
    for (int g = 0; g < kNumOutcomes; ++g) p[static_cast<std::size_t>(g)] = w_(t, 0) * rho_[static_cast<std::size_t>(g)];
    for (int c = 0; c < C; ++c) {
      const auto& a = A[chosen[c]];
      const double wc = w_(t, c + 1);
      for (int g = 0; g < kNumOutcomes; ++g) p[static_cast<std::size_t>(g)] += wc * a[static_cast<std::size_t>(g)];
    }
  }
}

// ---------------------------------------------------------------------------

void validate_ladder(const std::vector<double>& ladder) {
  if (ladder.empty()) throw std::invalid_argument("temperature ladder is empty");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] >= 1.0)) throw std::invalid_argument("temperatures must be at least 1");
    if (i > 0 && ladder[i] > ladder[i - 1]) throw std::invalid_argument("temperature ladder must be nonincreasing");
  }
  if (ladder.back() != 1.0) throw std::invalid_argument("last temperature must be 1");
}

SplitData split_counts(const ReadCounts& counts, double b) {
  if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("training fraction must lie in (0,1)");
  SplitData s{counts.scaled(b), counts, b};
  auto& test = s.test.data();
  const auto& train = s.train.data();
  // test = n - b n, so that train + test reproduces n
  for (std::size_t i = 0; i < test.size(); ++i) test[i] -= train[i];
  return s;
}

double choose_b(const ReadCounts& counts, double target) {
  const double total = counts.grand_total();
  const double per_sample = target / counts.samples();
  if (!(target > 0.0)) throw std::invalid_argument("test target must be positive");
  if (per_sample >= total) throw std::invalid_argument("test target exceeds the total read count");
  return 1.0 - per_sample / total;
}

double test_log_likelihood(const ReadCounts& test, const ProbTable& probs) { return log_likelihood(test, probs); }

double log_model_prior(const ModelSpec& spec, int C, const TreeTopology* tree, const TopologySpace* space) {
  if (!spec.is_tree()) return log_prior_C(C, spec.hyper.r, spec.hyper.geometric);
  if (tree == nullptr || space == nullptr) throw std::invalid_argument("tree prior needs the tree and its space");
  return log_prior_tree_size(C, spec.tree.alpha) + space->log_prob_given_C(*tree);
}

double transdim_log_acceptance(double test_ll_current, double log_prior_current, double test_ll_proposal,
                               double log_prior_proposal) {
  return (test_ll_proposal + log_prior_proposal) - (test_ll_current + log_prior_current);
}

void SamplerConfig::validate() const {
  if (iters < 1 || burnin < 0 || burnin >= iters) throw std::invalid_argument("need 0 <= burnin < iters");
  if (thin < 1) throw std::invalid_argument("thin must be positive");
  validate_ladder(ladder);
  validate_ladder(candidate_ladder);
  if (!(u0 >= 0.0 && u0 <= 1.0)) throw std::invalid_argument("u0 must lie in [0,1]");
  if (c_min < 1 || c_min > c_max) throw std::invalid_argument("need 1 <= cmin <= cmax");
  if (train_frac > 0.0 && train_frac >= 1.0) throw std::invalid_argument("training fraction must lie in (0,1)");
  if (candidate_warmup < 0 || candidate_advance < 1) throw std::invalid_argument("bad candidate chain schedule");
  if (initial_C != 0 && (initial_C < c_min || initial_C > c_max)) {
    throw std::invalid_argument("initial C outside [cmin, cmax]");
  }
}

double log_map_objective(const ModelSpec& spec, const ReadCounts& counts, const PosteriorDraw& draw) {
  double v = log_likelihood(counts, draw.z, draw.w, draw.rho);
  if (spec.is_tree()) {
    if (!draw.tree) throw std::invalid_argument("tree draw without a tree");
    v += log_prior_Z_given_tree(draw.z, *draw.tree, spec.lambda(counts.pairs(), draw.C()));
  }
  const WeightPrior wp = spec.weight_prior(draw.C());
  for (int t = 0; t < draw.w.rows(); ++t) v += wp.logpdf(draw.w.row(t));
  return v + log_prior_rho(draw.rho, spec.hyper.d1);
}

// ---------------------------------------------------------------------------

namespace {

struct ModelKey {
  int C = 0;
  std::vector<int> parent;
  friend bool operator<(const ModelKey& a, const ModelKey& b) {
    return a.C != b.C ? a.C < b.C : a.parent < b.parent;
  }
};

using Ensemble = TemperedEnsemble<Chain>;

Ensemble make_ensemble(const ModelSpec& spec, const ReadCounts& data, const std::vector<double>& ladder, double u0,
                       std::uint64_t seed, std::uint64_t stream, const ModelKey& key,
                       const std::optional<TreeTopology>& tree) {
  std::vector<Chain> chains;
  chains.reserve(ladder.size());
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    chains.emplace_back(spec, data, ladder[i], make_stream(seed, stream + 1 + i));
    chains.back().init_from_prior(key.C, tree ? &*tree : nullptr);
  }
  return Ensemble(std::move(chains), u0, make_stream(seed, stream));
}

}  // namespace

FitResult run_fit(const ReadCounts& counts, const ModelSpec& spec, const SamplerConfig& config,
                  const ProgressFn& progress) {
  config.validate();
  spec.hyper.validate();
  if (counts.samples() < 1 || counts.pairs() < 1) throw std::invalid_argument("no data to fit");

  FitResult result;
  result.samples.variant = spec.variant;
  const double b = config.train_frac > 0.0 ? config.train_frac : choose_b(counts, config.test_target);
  result.b = b;
  const SplitData split = split_counts(counts, b);

  std::optional<TopologySpace> space;
  if (spec.is_tree()) space.emplace(config.c_min, config.c_max, spec.tree.beta);

  Rng proposal_rng = make_stream(config.seed, 1);
  auto propose = [&]() -> std::pair<ModelKey, std::optional<TreeTopology>> {
    if (space) {
      const TreeTopology& t = space->sample_uniform(proposal_rng);
      return {ModelKey{t.size(), t.parents()}, t};
    }
    const int C = std::uniform_int_distribution<int>(config.c_min, config.c_max)(proposal_rng);
    return {ModelKey{C, {}}, std::nullopt};
  };

  // starting model
  ModelKey key;
  std::optional<TreeTopology> tree;
  if (spec.is_tree() && config.initial_tree) {
    tree = config.initial_tree;
    key = ModelKey{tree->size(), tree->parents()};
  } else if (config.initial_C > 0 && !spec.is_tree()) {
    key = ModelKey{config.initial_C, {}};
  } else {
    std::tie(key, tree) = propose();
  }

  Ensemble live = make_ensemble(spec, counts, config.ladder, config.u0, config.seed, 1000, key, tree);

  struct Candidate {
    Ensemble ensemble;
  };
  std::map<ModelKey, Candidate> candidates;
  std::uint64_t next_stream = 100000;

  auto& tel = result.telemetry;
  tel.ladder = config.ladder;
  tel.trace_C.reserve(static_cast<std::size_t>(config.iters));
  tel.trace_loglik.reserve(static_cast<std::size_t>(config.iters));
  tel.trace_logpost.reserve(static_cast<std::size_t>(config.iters));

  double current_model_prior = log_model_prior(spec, key.C, tree ? &*tree : nullptr, space ? &*space : nullptr);

  for (int it = 1; it <= config.iters; ++it) {
    live.step();

    if (config.transdim) {
      auto [cand_key, cand_tree] = propose();
      auto found = candidates.find(cand_key);
      if (found == candidates.end()) {
        Ensemble e = make_ensemble(spec, split.train, config.candidate_ladder, config.u0, config.seed, next_stream,
                                   cand_key, cand_tree);
        next_stream += 1000;
        for (int s = 0; s < config.candidate_warmup; ++s) e.step();
        found = candidates.emplace(cand_key, Candidate{std::move(e)}).first;
        ++tel.candidates_created;
      }
      Ensemble& cand = found->second.ensemble;
      for (int s = 0; s < config.candidate_advance; ++s) cand.step();

      const double ll_cur = test_log_likelihood(split.test, live.cold().probs());
      const double ll_prop = test_log_likelihood(split.test, cand.cold().probs());
      const double prior_prop =
          log_model_prior(spec, cand_key.C, cand_tree ? &*cand_tree : nullptr, space ? &*space : nullptr);
      const double log_a = transdim_log_acceptance(ll_cur, current_model_prior, ll_prop, prior_prop);
      ++tel.transdim.proposed;
      if (accept(log_a, proposal_rng)) {
        ++tel.transdim.accepted;
        auto& live_chains = live.chains();
        const auto& cand_chains = cand.chains();
        const bool aligned = cand_chains.size() == live_chains.size();
        for (std::size_t i = 0; i < live_chains.size(); ++i) {
          live_chains[i].set_state(aligned ? cand_chains[i].state() : cand_chains.back().state());
        }
        key = cand_key;
        tree = cand_tree;
        current_model_prior = prior_prop;
      }
    }

    const Chain& cold = live.cold();
    tel.trace_C.push_back(cold.state().C());
    tel.trace_loglik.push_back(cold.log_likelihood());
    tel.trace_logpost.push_back(cold.log_posterior());

    if (it > config.burnin && (it - config.burnin) % config.thin == 0) {
      PosteriorDraw d;
      d.iteration = it;
      d.z = cold.state().z;
      d.w = cold.weights();
      d.rho = cold.rho();
      d.tree = cold.state().tree;
      d.log_lik = cold.log_likelihood();
      d.log_post = log_map_objective(spec, counts, d);
      result.samples.draws.push_back(std::move(d));
    }
    if (progress && (it % 1000 == 0 || it == config.iters)) progress(it, cold.state().C());
  }

  for (const auto& c : live.chains()) {
    tel.theta.push_back(c.theta_stats());
    tel.rho.push_back(c.rho_stats());
  }
  tel.swaps.assign(live.swap_stats().begin(), live.swap_stats().end());
  if (!tel.swaps.empty()) tel.swaps.pop_back();  // last slot has no partner
  return result;
}

}  // namespace pairclone
