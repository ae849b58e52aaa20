#include "pairclone/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "pairclone/priors.hpp"

namespace pairclone {
namespace {

double mean_of(std::span<const double> x) {
  return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double s = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    s += (j % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

double statistic_value(const GewekeStatistic& s, const Matrix& w, const ProbTable& p) {
  if (s.kind == GewekeStatistic::Kind::weight) return w(s.t - 1, s.c);
  return p(s.t - 1, s.k - 1, s.g - 1);
}

void check_statistic(const GewekeStatistic& s, int T, int K, int J) {
  const bool ok = s.t >= 1 && s.t <= T &&
                  (s.kind == GewekeStatistic::Kind::weight ? s.c >= 0 && s.c < J
                                                           : s.k >= 1 && s.k <= K && s.g >= 1 && s.g <= kNumOutcomes);
  if (!ok) throw std::invalid_argument("statistic " + s.name() + " is out of range");
}

}  // namespace

int default_bandwidth(std::size_t L) { return static_cast<int>(std::floor(std::sqrt(static_cast<double>(L)))); }

double spectral_density_zero(std::span<const double> x, int bandwidth) {
  const std::size_t L = x.size();
  if (L < 2) return 0.0;
  const int M = std::min<int>(bandwidth > 0 ? bandwidth : default_bandwidth(L), static_cast<int>(L) - 1);
  const double m = mean_of(x);
  std::vector<double> d(L);
  for (std::size_t i = 0; i < L; ++i) d[i] = x[i] - m;
  double s = 0.0;
  for (int h = 0; h <= M; ++h) {
    double gamma = 0.0;
    for (std::size_t i = 0; i + static_cast<std::size_t>(h) < L; ++i) gamma += d[i] * d[i + static_cast<std::size_t>(h)];
    gamma /= static_cast<double>(L);
    s += h == 0 ? gamma : 2.0 * (1.0 - static_cast<double>(h) / (M + 1)) * gamma;
  }
  return std::max(s, 0.0);
}

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

ZTest geweke_convergence(std::span<const double> x, double frac_a, double frac_b, int bandwidth) {
  if (!(frac_a > 0.0 && frac_b > 0.0 && frac_a + frac_b < 1.0)) {
    throw std::invalid_argument("trace windows overlap");
  }
  const auto L = x.size();
  const auto la = static_cast<std::size_t>(std::floor(frac_a * static_cast<double>(L)));
  const auto lb = static_cast<std::size_t>(std::floor(frac_b * static_cast<double>(L)));
  if (la < 2 || lb < 2) throw std::invalid_argument("trace too short for the convergence test");
  const auto a = x.first(la);
  const auto b = x.last(lb);
  ZTest out;
  const double var = spectral_density_zero(a, bandwidth) / static_cast<double>(la) +
                     spectral_density_zero(b, bandwidth) / static_cast<double>(lb);
  if (!(var > 0.0)) {
    out.skipped = true;
    out.note = "constant trace";
    return out;
  }
  out.z = (mean_of(a) - mean_of(b)) / std::sqrt(var);
  out.p = two_sided_p(out.z);
  return out;
}

std::vector<double> autocorrelation(std::span<const double> x, int max_lag) {
  const std::size_t L = x.size();
  std::vector<double> acf(static_cast<std::size_t>(std::max(max_lag, 0)) + 1, 0.0);
  if (L == 0) return acf;
  const double m = mean_of(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);
  acf[0] = 1.0;
  if (c0 <= 0.0) return acf;
  for (int h = 1; h <= max_lag && static_cast<std::size_t>(h) < L; ++h) {
    double c = 0.0;
    for (std::size_t i = 0; i + static_cast<std::size_t>(h) < L; ++i) c += (x[i] - m) * (x[i + static_cast<std::size_t>(h)] - m);
    acf[static_cast<std::size_t>(h)] = c / c0;
  }
  return acf;
}

KsResult ks_test(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw std::invalid_argument("empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double rn = std::sqrt(n);
  return {d, kolmogorov_q((rn + 0.12 + 0.11 / rn) * d)};
}

ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size()) throw std::invalid_argument("cell counts differ");
  ChiSquareResult r;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) {
      if (observed[i] > 0.0) return {std::numeric_limits<double>::infinity(), 0, 0.0};
      continue;
    }
    const double d = observed[i] - expected[i];
    r.statistic += d * d / expected[i];
    ++cells;
  }
  r.dof = cells - 1;
  if (r.dof < 1) return r;
  r.p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
  return r;
}

// --- joint-distribution test -------------------------------------------------

std::string GewekeStatistic::name() const {
  if (kind == Kind::weight) return "w_" + std::to_string(t) + "_" + std::to_string(c);
  return "p_" + std::to_string(t) + "_" + std::to_string(k) + "_" + std::to_string(g);
}

GewekeStatistic GewekeStatistic::weight(int t, int c) { return {Kind::weight, t, c, 1, 1}; }
GewekeStatistic GewekeStatistic::prob(int t, int k, int g) { return {Kind::prob, t, 1, k, g}; }

std::vector<GewekeStatistic> default_geweke_statistics() {
  return {GewekeStatistic::weight(1, 2), GewekeStatistic::weight(4, 3), GewekeStatistic::weight(2, 1),
          GewekeStatistic::prob(1, 23, 3), GewekeStatistic::prob(3, 60, 7), GewekeStatistic::prob(2, 13, 2)};
}

double analytic_prior_mean(const ModelSpec& spec, int C, const GewekeStatistic& s) {
  if (spec.is_tree()) throw std::invalid_argument("analytic prior means cover the flat variants only");
  const WeightPrior wp = spec.weight_prior(C);
  std::vector<double> ew(wp.conc.size());
  if (wp.special < 0) {
    const double total = std::accumulate(wp.conc.begin(), wp.conc.end(), 0.0);
    for (std::size_t j = 0; j < ew.size(); ++j) ew[j] = wp.conc[j] / total;
  } else {
    // w_s ~ Beta(a, b) and the rest is (1 - w_s) times an independent Dirichlet
    const auto sp = static_cast<std::size_t>(wp.special);
    const double es = wp.conc[sp] / (wp.conc[sp] + wp.special_b);
    double rest = 0.0;
    for (std::size_t j = 0; j < ew.size(); ++j) rest += j == sp ? 0.0 : wp.conc[j];
    for (std::size_t j = 0; j < ew.size(); ++j) ew[j] = j == sp ? es : (1.0 - es) * wp.conc[j] / rest;
  }
  if (s.kind == GewekeStatistic::Kind::weight) return ew.at(static_cast<std::size_t>(s.c));

  const double a = spec.hyper.alpha / C;
  const double e_ref = 1.0 / (1.0 + a);
  const auto& A = match_table();
  const int g = s.g - 1;
  double e_match = e_ref * A[0][static_cast<std::size_t>(g)];
  for (int q = 1; q < kNumGenotypes; ++q) {
    e_match += (1.0 - e_ref) / (kNumGenotypes - 1) * A[static_cast<std::size_t>(q)][static_cast<std::size_t>(g)];
  }
  const auto shapes = rho_star_shapes(spec.hyper.d1);
  double group_total = 0.0;
  for (int h = 0; h < kNumOutcomes; ++h) {
    if (rho_group(h) == rho_group(g)) group_total += shapes[static_cast<std::size_t>(h)];
  }
  const double e_rho = shapes[static_cast<std::size_t>(g)] / group_total;
  double p = ew[0] * e_rho;
  for (int c = 1; c <= C; ++c) p += ew[static_cast<std::size_t>(c)] * e_match;
  if (spec.variant == ModelVariant::purity) p += ew[static_cast<std::size_t>(C) + 1] * A[0][static_cast<std::size_t>(g)];
  return p;
}

std::vector<MonteCarloMean> prior_predictive_means(const GewekeConfig& config, long draws) {
  if (draws < 2) throw std::invalid_argument("need at least two prior draws");
  const ReadCounts empty(config.T, config.K);
  Chain chain(config.spec, empty, 1.0, make_stream(config.seed, 7));
  const std::size_t S = config.statistics.size();
  std::vector<double> sum(S, 0.0), sum2(S, 0.0);
  for (long i = 0; i < draws; ++i) {
    chain.init_from_prior(config.C);
    for (std::size_t s = 0; s < S; ++s) {
      const double v = statistic_value(config.statistics[s], chain.weights(), chain.probs());
      sum[s] += v;
      sum2[s] += v * v;
    }
  }
  std::vector<MonteCarloMean> out(S);
  const auto n = static_cast<double>(draws);
  for (std::size_t s = 0; s < S; ++s) {
    const double m = sum[s] / n;
    const double var = std::max(0.0, (sum2[s] - n * m * m) / (n - 1.0));
    out[s] = {m, std::sqrt(var / n)};
  }
  return out;
}

GewekeReport geweke_joint(const GewekeConfig& config, const GewekeProgress& progress) {
  if (config.spec.is_tree()) throw std::invalid_argument("the joint test covers the flat variants");
  if (config.T < 1 || config.K < 1 || config.C < 1 || config.L < 100 || config.depth < 0 ||
      config.sweeps < 1) {
    throw std::invalid_argument("bad joint-test configuration");
  }
  const int J = config.spec.weight_width(config.C);
  for (const auto& s : config.statistics) check_statistic(s, config.T, config.K, J);

  ReadCounts data(config.T, config.K);
  Chain chain(config.spec, data, 1.0, make_stream(config.seed, 1));
  chain.init_from_prior(config.C);
  Rng data_rng = make_stream(config.seed, 2);

  const std::size_t S = config.statistics.size();
  GewekeReport report;
  report.L = config.L;
  report.bandwidth = config.bandwidth > 0 ? config.bandwidth : default_bandwidth(static_cast<std::size_t>(config.L));
  report.results.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    report.results[s].statistic = config.statistics[s];
    report.results[s].trace.reserve(static_cast<std::size_t>(config.L));
  }

  std::array<double, kNumOutcomes> p_hat{};
  for (long l = 1; l <= config.L; ++l) {
    const ProbTable& p = chain.probs();
    for (int t = 0; t < config.T; ++t) {
      for (int k = 0; k < config.K; ++k) {
        const auto pt = p.cell(t, k);
        for (int g = 0; g < kNumOutcomes; ++g) {
          p_hat[static_cast<std::size_t>(g)] =
              config.class_rates[static_cast<std::size_t>(rho_group(g))] * pt[static_cast<std::size_t>(g)];
        }
        multinomial_variate(config.depth, p_hat, data.cell(t, k), data_rng);
      }
    }
    chain.refresh();
    for (int i = 0; i < config.sweeps; ++i) chain.sweep();
    for (std::size_t s = 0; s < S; ++s) {
      report.results[s].trace.push_back(statistic_value(config.statistics[s], chain.weights(), chain.probs()));
    }
    if (progress && l % 10000 == 0) progress(l);
  }

  std::vector<MonteCarloMean> mc;
  if (config.prior_draws > 0) {
    mc = prior_predictive_means(config, config.prior_draws);
    report.analytic_means = false;
  }
  for (std::size_t s = 0; s < S; ++s) {
    auto& r = report.results[s];
    r.mean = mean_of(r.trace);
    if (mc.empty()) {
      r.prior_mean = analytic_prior_mean(config.spec, config.C, r.statistic);
    } else {
      r.prior_mean = mc[s].mean;
      r.prior_mean_se = mc[s].se;
    }
    if (is_constant(r.trace)) {
      r.test.skipped = true;
      r.test.note = "statistic is constant; test skipped";
      continue;
    }
    r.spectral_density = spectral_density_zero(r.trace, report.bandwidth);
    const double var = r.spectral_density / static_cast<double>(config.L) + r.prior_mean_se * r.prior_mean_se;
    r.test.z = (r.mean - r.prior_mean) / std::sqrt(var);
    r.test.p = two_sided_p(r.test.z);
  }
  return report;
}

// --- exports -------------------------------------------------------------------

void export_trace(const std::filesystem::path& dir, const std::string& name, std::span<const double> x, int max_lag) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / ("trace_" + name + ".csv"));
    if (!out) throw std::runtime_error("cannot write trace for " + name);
    out.precision(17);
    out << "iteration,value\n";
    for (std::size_t i = 0; i < x.size(); ++i) out << i + 1 << ',' << x[i] << '\n';
  }
  std::ofstream out(dir / ("acf_" + name + ".csv"));
  if (!out) throw std::runtime_error("cannot write autocorrelation for " + name);
  out.precision(17);
  out << "lag,acf\n";
  const auto acf = autocorrelation(x, max_lag);
  for (std::size_t h = 0; h < acf.size(); ++h) out << h << ',' << acf[h] << '\n';
}

Histogram histogram(std::span<const double> x, double lo, double hi, int bins) {
  if (!(hi > lo) || bins < 1) throw std::invalid_argument("bad histogram range");
  Histogram h{lo, hi, std::vector<long>(static_cast<std::size_t>(bins), 0), 0, 0};
  const double width = (hi - lo) / bins;
  for (double v : x) {
    if (!std::isfinite(v)) continue;
    if (v < lo) {
      ++h.below;
    } else if (v >= hi) {
      ++h.above;
    } else {
      const auto b = std::min(bins - 1, static_cast<int>((v - lo) / width));
      ++h.counts[static_cast<std::size_t>(b)];
    }
  }
  return h;
}

}  // namespace pairclone
