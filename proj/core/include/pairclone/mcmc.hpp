#pragma once

// Posterior simulation: within-model kernels, parallel tempering, the
// fractional train/test split and the trans-dimensional move over C (flat
// models) or (tree, C) (tree model).

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pairclone/priors.hpp"
#include "pairclone/random.hpp"
#include "pairclone/tree.hpp"
#include "pairclone/types.hpp"

namespace pairclone {

enum class ModelVariant { flat, purity, tree };

std::string to_string(ModelVariant v);
ModelVariant parse_model_variant(const std::string& name);

struct TreeHyper {
  double alpha = 0.5;
  double beta = 0.5;
  double lambda = 0.0;  // <= 0 selects 2K/C
  double a_p = -1.0;    // < 0 selects d
  double b_p = -1.0;    // < 0 selects d0 + (C-1) d
};

struct ModelSpec {
  ModelVariant variant = ModelVariant::flat;
  Hyperparams hyper;
  TreeHyper tree;
  double theta_step = 0.2;
  double rho_step = 0.1;
  // Drops the log-scale Jacobian from the theta update. Only for testing the
  // sampler-validation machinery; the resulting chain is wrong.
  bool broken_jacobian = false;
  // Adds a joint Gibbs draw of two random columns per row after the
  // entry-wise Z sweep (flat variants).
  bool pair_block_z = true;

  [[nodiscard]] bool is_tree() const { return variant == ModelVariant::tree; }
  // Number of components in a weight row for C columns of Z.
  [[nodiscard]] int weight_width(int C) const;
  [[nodiscard]] WeightPrior weight_prior(int C) const;
  [[nodiscard]] double lambda(int pairs, int C) const;
};

struct ChainState {
  GenotypeMatrix z;
  Matrix log_pi;     // C x 10; flat variants only
  Matrix log_theta;  // T x J
  std::array<double, kNumOutcomes> log_rho_star{};
  std::optional<TreeTopology> tree;

  [[nodiscard]] int C() const { return z.subclones(); }
  [[nodiscard]] Matrix weights() const;
  [[nodiscard]] NoiseVector rho() const;
};

struct MoveStats {
  long proposed = 0;
  long accepted = 0;
  [[nodiscard]] double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
  MoveStats& operator+=(const MoveStats& o) {
    proposed += o.proposed;
    accepted += o.accepted;
    return *this;
  }
};

// One Markov chain on posterior^(1/temperature) for fixed C (and tree).
// The spec and data must outlive the chain.
class Chain {
 public:
  Chain(const ModelSpec& spec, const ReadCounts& data, double temperature, Rng rng);

  void init_from_prior(int C, const TreeTopology* tree = nullptr);
  void set_state(ChainState state);
  void rebind(const ReadCounts& data);

  // Z, pi, theta, rho* (tree model: Z rows, theta, rho*).
  void sweep();

  void update_Z();
  void update_Z_entry(int k, int c);
  void update_Z_pair(int k, int c1, int c2);
  void update_Z_rows();
  void update_Z_row(int k);
  void update_pi();
  void update_theta();
  void update_rho_star();

  [[nodiscard]] const ChainState& state() const { return state_; }
  [[nodiscard]] const Matrix& weights() const { return w_; }
  [[nodiscard]] const NoiseVector& rho() const { return rho_; }
  [[nodiscard]] const ProbTable& probs() const { return probs_; }
  [[nodiscard]] const ReadCounts& data() const { return *data_; }
  [[nodiscard]] const ModelSpec& spec() const { return *spec_; }

  // Untempered log likelihood of the bound data and log prior of the state.
  [[nodiscard]] double log_likelihood() const { return loglik_; }
  [[nodiscard]] double log_prior() const;
  [[nodiscard]] double log_posterior() const { return loglik_ + log_prior(); }

  [[nodiscard]] double temperature() const { return temperature_; }
  void set_temperature(double t);

  [[nodiscard]] Rng& rng() { return rng_; }
  [[nodiscard]] const MoveStats& theta_stats() const { return theta_stats_; }
  [[nodiscard]] const MoveStats& rho_stats() const { return rho_stats_; }

  // Full recomputation of weights, probabilities and likelihood.
  void refresh();

 private:
  void recompute_tree_prior();
  [[nodiscard]] double log_prior_pi() const;
  [[nodiscard]] double log_prior_theta_row(int t) const;  // density in theta (not log theta)
  [[nodiscard]] double log_prior_rho_star() const;
  [[nodiscard]] double sample_loglik(int t, const ProbTable& p) const;

  const ModelSpec* spec_;
  const ReadCounts* data_;
  double temperature_;
  Rng rng_;
  ChainState state_;
  WeightPrior wprior_;
  std::optional<TruncPoisson> tpois_;
  Matrix w_;
  NoiseVector rho_{};
  ProbTable probs_;
  std::vector<double> loglik_t_;
  double loglik_ = 0.0;
  double log_prior_z_tree_ = 0.0;
  MoveStats theta_stats_;
  MoveStats rho_stats_;
};

// Algorithm 1 of parallel tempering: with probability u0 every chain sweeps,
// otherwise one adjacent pair attempts a state swap. chains.back() is the
// cold chain. ChainT needs sweep(), log_posterior(), temperature(),
// set_temperature().
template <class ChainT>
class TemperedEnsemble {
 public:
  TemperedEnsemble(std::vector<ChainT> chains, double u0, Rng rng)
      : chains_(std::move(chains)), u0_(u0), rng_(std::move(rng)), swaps_(chains_.size()) {}

  void step() {
    if (chains_.size() < 2 || uniform01(rng_) < u0_) {
      for (auto& c : chains_) c.sweep();
      return;
    }
    std::uniform_int_distribution<std::size_t> pick(0, chains_.size() - 2);
    const std::size_t i = pick(rng_);
    auto& a = chains_[i];
    auto& b = chains_[i + 1];
    const double ta = a.temperature();
    const double tb = b.temperature();
    const double log_r = (1.0 / ta - 1.0 / tb) * (b.log_posterior() - a.log_posterior());
    ++swaps_[i].proposed;
    if (std::log(uniform01(rng_)) < log_r || log_r >= 0.0) {
      std::swap(a, b);
      a.set_temperature(ta);
      b.set_temperature(tb);
      ++swaps_[i].accepted;
    }
  }

  [[nodiscard]] ChainT& cold() { return chains_.back(); }
  [[nodiscard]] const ChainT& cold() const { return chains_.back(); }
  [[nodiscard]] std::vector<ChainT>& chains() { return chains_; }
  [[nodiscard]] const std::vector<ChainT>& chains() const { return chains_; }
  // swap_stats()[i] covers the pair (i, i+1).
  [[nodiscard]] const std::vector<MoveStats>& swap_stats() const { return swaps_; }

 private:
  std::vector<ChainT> chains_;
  double u0_;
  Rng rng_;
  std::vector<MoveStats> swaps_;
};

inline const std::vector<double>& default_ladder() {
  static const std::vector<double> ladder = {4.5, 3.2, 2.5, 2.0, 1.7, 1.5, 1.35, 1.2, 1.1, 1.0};
  return ladder;
}

void validate_ladder(const std::vector<double>& ladder);

struct SplitData {
  ReadCounts train;
  ReadCounts test;
  double b = 1.0;
};

[[nodiscard]] SplitData split_counts(const ReadCounts& counts, double b);

// b such that (1 - b) * sum N = target / T.
[[nodiscard]] double choose_b(const ReadCounts& counts, double target = 160.0);

// sum n'' log p~ with p~ taken from a chain's cache.
[[nodiscard]] double test_log_likelihood(const ReadCounts& test, const ProbTable& probs);

// log p(C) (flat) or log p(T, C) (tree).
[[nodiscard]] double log_model_prior(const ModelSpec& spec, int C, const TreeTopology* tree,
                                     const TopologySpace* space);

// log of the trans-dimensional acceptance ratio (before taking min with 0).
[[nodiscard]] double transdim_log_acceptance(double test_ll_current, double log_prior_current,
                                             double test_ll_proposal, double log_prior_proposal);

struct SamplerConfig {
  int iters = 30000;
  int burnin = 10000;
  int thin = 10;
  std::uint64_t seed = 1;
  std::vector<double> ladder = default_ladder();
  double u0 = 0.9;
  double train_frac = 0.0;  // <= 0 selects choose_b(test_target)
  double test_target = 160.0;
  int c_min = 1;
  int c_max = 10;
  int initial_C = 0;       // 0 draws from the proposal
  bool transdim = true;    // false keeps C (and the tree) fixed
  std::optional<TreeTopology> initial_tree;
  std::vector<double> candidate_ladder = {1.0};
  int candidate_warmup = 200;
  int candidate_advance = 1;

  void validate() const;
};

struct PosteriorDraw {
  int iteration = 0;
  GenotypeMatrix z;
  Matrix w;
  NoiseVector rho{};
  std::optional<TreeTopology> tree;
  double log_lik = 0.0;
  // log p(n | x) + log p(x | T, C), the quantity maximised by the MAP estimate.
  double log_post = 0.0;

  [[nodiscard]] int C() const { return z.subclones(); }
};

struct PosteriorSamples {
  ModelVariant variant = ModelVariant::flat;
  std::vector<PosteriorDraw> draws;
};

struct Telemetry {
  std::vector<double> ladder;
  std::vector<MoveStats> theta;  // per ladder position, summed over the run
  std::vector<MoveStats> rho;
  std::vector<MoveStats> swaps;  // per adjacent pair
  MoveStats transdim;
  // per iteration, cold chain
  std::vector<int> trace_C;
  std::vector<double> trace_loglik;
  std::vector<double> trace_logpost;
  int candidates_created = 0;
};

struct FitResult {
  PosteriorSamples samples;
  Telemetry telemetry;
  double b = 1.0;
};

// log p(n | x) + log p(Z | T) [tree] + log p(w) + log p(rho), on normalised weights.
[[nodiscard]] double log_map_objective(const ModelSpec& spec, const ReadCounts& counts,
                                       const PosteriorDraw& draw);

using ProgressFn = std::function<void(int iteration, int C)>;

[[nodiscard]] FitResult run_fit(const ReadCounts& counts, const ModelSpec& spec, const SamplerConfig& config,
                                const ProgressFn& progress = {});

}  // namespace pairclone
