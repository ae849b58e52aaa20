#pragma once

// Sampler validation and convergence checks.

#include <cstdint>
#include <functional>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pairclone/mcmc.hpp"
#include "pairclone/types.hpp"

namespace pairclone {

// Bartlett lag-window estimate of the spectral density at frequency zero.
// bandwidth <= 0 selects floor(sqrt(L)).
[[nodiscard]] double spectral_density_zero(std::span<const double> x, int bandwidth = 0);
[[nodiscard]] int default_bandwidth(std::size_t L);

[[nodiscard]] double two_sided_p(double z);

struct ZTest {
  double z = 0.0;
  double p = 1.0;
  bool skipped = false;  // degenerate (constant) input
  std::string note;
};

// Split-chain comparison of the first frac_a and last frac_b of a trace.
[[nodiscard]] ZTest geweke_convergence(std::span<const double> x, double frac_a = 0.1, double frac_b = 0.5,
                                       int bandwidth = 0);

[[nodiscard]] std::vector<double> autocorrelation(std::span<const double> x, int max_lag);

// One-sample Kolmogorov-Smirnov test; cdf must be continuous.
struct KsResult {
  double statistic = 0.0;
  double p = 1.0;
};
[[nodiscard]] KsResult ks_test(std::vector<double> x, const std::function<double(double)>& cdf);

// Pearson chi-square goodness of fit; cells with zero expectation must be empty.
struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p = 1.0;
};
[[nodiscard]] ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected);

// --- joint-distribution test -------------------------------------------------

struct GewekeStatistic {
  enum class Kind { weight, prob };
  Kind kind = Kind::weight;
  int t = 1;  // 1-based sample
  int c = 1;  // weight column, 0 = background
  int k = 1;  // 1-based pair
  int g = 1;  // 1-based outcome
  [[nodiscard]] std::string name() const;
  [[nodiscard]] static GewekeStatistic weight(int t, int c);
  [[nodiscard]] static GewekeStatistic prob(int t, int k, int g);
};

[[nodiscard]] std::vector<GewekeStatistic> default_geweke_statistics();

struct GewekeConfig {
  ModelSpec spec;
  int T = 4;
  int K = 80;
  int C = 3;
  long L = 200000;
  long depth = 2;   // reads per (t, k) in every simulated data set
  int sweeps = 5;   // sampler sweeps between data draws
  std::array<double, 3> class_rates = {0.4, 0.3, 0.3};
  std::uint64_t seed = 1;
  std::vector<GewekeStatistic> statistics = default_geweke_statistics();
  long prior_draws = 0;  // > 0 estimates the prior means by Monte Carlo
  int bandwidth = 0;
};

struct GewekeStatResult {
  GewekeStatistic statistic;
  double mean = 0.0;
  double prior_mean = 0.0;
  double prior_mean_se = 0.0;  // zero for analytic means
  double spectral_density = 0.0;
  ZTest test;
  std::vector<double> trace;
};

struct GewekeReport {
  long L = 0;
  int bandwidth = 0;
  bool analytic_means = true;
  std::vector<GewekeStatResult> results;
};

[[nodiscard]] double analytic_prior_mean(const ModelSpec& spec, int C, const GewekeStatistic& s);

struct MonteCarloMean {
  double mean = 0.0;
  double se = 0.0;
};
[[nodiscard]] std::vector<MonteCarloMean> prior_predictive_means(const GewekeConfig& config, long draws);

using GewekeProgress = std::function<void(long cycle)>;
[[nodiscard]] GewekeReport geweke_joint(const GewekeConfig& config, const GewekeProgress& progress = {});

// --- exports -------------------------------------------------------------------

// Writes <dir>/trace_<name>.csv (iteration,value) and <dir>/acf_<name>.csv (lag,acf).
void export_trace(const std::filesystem::path& dir, const std::string& name, std::span<const double> x,
                  int max_lag = 50);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<long> counts;
  long below = 0;
  long above = 0;
};
// Finite values only.
[[nodiscard]] Histogram histogram(std::span<const double> x, double lo, double hi, int bins);

}  // namespace pairclone
