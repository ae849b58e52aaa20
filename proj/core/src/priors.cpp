#include "pairclone/priors.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pairclone {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSimplexTol = 1e-9;

bool on_open_simplex(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) {
    if (!(v > 0.0) || !(v < 1.0 + kSimplexTol)) return false;
    s += v;
  }
  return std::abs(s - 1.0) <= kSimplexTol * static_cast<double>(x.size());
}

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double beta_logpdf(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0)) return kNegInf;
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta_fn(a, b);
}

}  // namespace

void Hyperparams::validate() const {
  for (double v : {alpha, gamma, d0, d, d1, d1_star, d2_star}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("hyperparameters must be positive");
  }
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("geometric r must lie in (0,1)");
  if (c_min < 1 || c_min > c_max) throw std::invalid_argument("need 1 <= c_min <= c_max");
}

double log_prior_C(int C, double r, GeometricForm form) {
  if (C < 1) throw std::invalid_argument("C must be at least 1");
  const int exponent = form == GeometricForm::as_printed ? C : C - 1;
  return exponent * std::log1p(-r) + std::log(r);
}

void BetaDirichlet::sample_log(std::span<double> log_pi, Rng& rng) const {
  if (log_pi.size() < 2) throw std::invalid_argument("need at least two categories");
  // pi_1 = G1 / (G1 + G2) with G1 ~ Ga(1), G2 ~ Ga(first_b)
  const double g1 = log_gamma_variate(1.0, rng);
  const double g2 = log_gamma_variate(first_b, rng);
  const double pair[2] = {g1, g2};
  const double norm = log_sum_exp(pair);
  log_pi[0] = g1 - norm;
  const double log_rest = g2 - norm;
  const std::vector<double> conc(log_pi.size() - 1, gamma);
  log_dirichlet_variate(conc, log_pi.subspan(1), rng);
  for (std::size_t q = 1; q < log_pi.size(); ++q) log_pi[q] += log_rest;
}

std::vector<double> BetaDirichlet::sample(int categories, Rng& rng) const {
  std::vector<double> out(static_cast<std::size_t>(categories));
  sample_log(out, rng);
  for (double& x : out) x = std::exp(x);
  return out;
}

double BetaDirichlet::logpdf(std::span<const double> pi) const {
  if (pi.size() < 2 || !on_open_simplex(pi)) return kNegInf;
  const double rest = 1.0 - pi[0];
  double lp = beta_logpdf(pi[0], 1.0, first_b);
  std::vector<double> tilde(pi.begin() + 1, pi.end());
  for (double& x : tilde) x /= rest;
  const std::vector<double> conc(tilde.size(), gamma);
  return lp + dirichlet_logpdf(tilde, conc);
}

Matrix code_counts(const GenotypeMatrix& z) {
  Matrix m(z.subclones(), kNumGenotypes);
  for (int k = 0; k < z.pairs(); ++k) {
    for (int c = 0; c < z.subclones(); ++c) m(c, z.index(k, c)) += 1.0;
  }
  return m;
}

double log_prior_Z_given_pi(const GenotypeMatrix& z, const LogColumnProbs& log_pi) {
  if (log_pi.rows() != z.subclones() || log_pi.cols() != kNumGenotypes) {
    throw std::invalid_argument("pi table shape does not match Z");
  }
  double s = 0.0;
  for (int k = 0; k < z.pairs(); ++k) {
    for (int c = 0; c < z.subclones(); ++c) s += log_pi(c, z.index(k, c));
  }
  return s;
}

double dirichlet_logpdf(std::span<const double> x, std::span<const double> conc) {
  if (x.size() != conc.size()) throw std::invalid_argument("dirichlet size mismatch");
  if (!on_open_simplex(x)) return kNegInf;
  double a = 0.0;
  double lp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    a += conc[i];
    lp += (conc[i] - 1.0) * std::log(x[i]) - std::lgamma(conc[i]);
  }
  return lp + std::lgamma(a);
}

double dirichlet_logpdf_log(std::span<const double> log_x, std::span<const double> conc) {
  if (log_x.size() != conc.size()) throw std::invalid_argument("dirichlet size mismatch");
  double a = 0.0;
  double lp = 0.0;
  for (std::size_t i = 0; i < log_x.size(); ++i) {
    if (!std::isfinite(log_x[i])) return kNegInf;
    a += conc[i];
    lp += (conc[i] - 1.0) * log_x[i] - std::lgamma(conc[i]);
  }
  return lp + std::lgamma(a);
}

double log_prior_w(std::span<const double> w_t, double d0, double d) {
  std::vector<double> conc(w_t.size(), d);
  if (!conc.empty()) conc[0] = d0;
  return dirichlet_logpdf(w_t, conc);
}

double log_prior_w_purity(double w_star, std::span<const double> w_tilde, double d1s, double d2s,
                          double d0, double d) {
  return beta_logpdf(w_star, d1s, d2s) + log_prior_w(w_tilde, d0, d);
}

WeightPrior WeightPrior::flat(int subclones, double d0, double d) {
  WeightPrior p;
  p.conc.assign(static_cast<std::size_t>(subclones) + 1, d);
  p.conc[0] = d0;
  return p;
}

WeightPrior WeightPrior::purity(int subclones, double d0, double d, double d1s, double d2s) {
  WeightPrior p = flat(subclones, d0, d);
  p.conc.push_back(d1s);
  p.special = subclones + 1;
  p.special_b = d2s;
  return p;
}

WeightPrior WeightPrior::tree(int subclones, double d0, double d, double a_p, double b_p) {
  if (subclones < 1) throw std::invalid_argument("tree model needs the normal clone");
  WeightPrior p = flat(subclones, d0, d);
  p.conc[1] = a_p;
  p.special = 1;
  p.special_b = b_p;
  return p;
}

double WeightPrior::logpdf(std::span<const double> w) const {
  if (w.size() != conc.size()) throw std::invalid_argument("weight row has the wrong length");
  if (!on_open_simplex(w)) return kNegInf;
  std::vector<double> log_w(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) log_w[i] = std::log(w[i]);
  return logpdf_log(log_w);
}

double WeightPrior::logpdf_log(std::span<const double> log_w) const {
  if (log_w.size() != conc.size()) throw std::invalid_argument("weight row has the wrong length");
  if (special < 0) return dirichlet_logpdf_log(log_w, conc);
  const auto s = static_cast<std::size_t>(special);
  std::vector<double> rest_log;
  std::vector<double> rest_conc;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    if (i == s) continue;
    rest_log.push_back(log_w[i]);
    rest_conc.push_back(conc[i]);
  }
  const double log_rest = log_sum_exp(rest_log);
  for (double& x : rest_log) x -= log_rest;
  const double a = conc[s];
  const double b = special_b;
  if (!std::isfinite(log_w[s]) || !std::isfinite(log_rest)) return kNegInf;
  const double beta = (a - 1.0) * log_w[s] + (b - 1.0) * log_rest - log_beta_fn(a, b);
  const double jac = -static_cast<double>(rest_log.size() - 1) * log_rest;
  return beta + dirichlet_logpdf_log(rest_log, rest_conc) + jac;
}

double WeightPrior::log_density_log_theta(std::span<const double> log_theta) const {
  if (log_theta.size() != conc.size()) throw std::invalid_argument("theta row has the wrong length");
  double lp = 0.0;
  for (std::size_t i = 0; i < log_theta.size(); ++i) lp += conc[i] * log_theta[i] - std::exp(log_theta[i]);
  if (special >= 0) {
    double big_b = 0.0;
    std::vector<double> rest;
    for (std::size_t i = 0; i < conc.size(); ++i) {
      if (static_cast<int>(i) == special) continue;
      big_b += conc[i];
      rest.push_back(log_theta[i]);
    }
    const double tilt = special_b - big_b;
    if (tilt != 0.0) lp += tilt * (log_sum_exp(rest) - log_sum_exp(log_theta));
  }
  return lp;
}

void WeightPrior::sample_log_w(std::span<double> log_w, Rng& rng) const {
  if (log_w.size() != conc.size()) throw std::invalid_argument("weight row has the wrong length");
  if (special < 0) {
    log_dirichlet_variate(conc, log_w, rng);
    return;
  }
  const auto s = static_cast<std::size_t>(special);
  std::vector<double> rest_conc;
  for (std::size_t i = 0; i < conc.size(); ++i) {
    if (i != s) rest_conc.push_back(conc[i]);
  }
  std::vector<double> rest(rest_conc.size());
  log_dirichlet_variate(rest_conc, rest, rng);
  const double ga = log_gamma_variate(conc[s], rng);
  const double gb = log_gamma_variate(special_b, rng);
  const double pair[2] = {ga, gb};
  const double norm = log_sum_exp(pair);
  const double log_rest_total = gb - norm;
  std::size_t j = 0;
  for (std::size_t i = 0; i < conc.size(); ++i) {
    log_w[i] = i == s ? ga - norm : rest[j++] + log_rest_total;
  }
}

void WeightPrior::sample_log_theta(std::span<double> log_theta, Rng& rng) const {
  sample_log_w(log_theta, rng);
  // The tilt depends on w only, so the total stays Ga(sum conc) and independent.
  const double total = std::accumulate(conc.begin(), conc.end(), 0.0);
  const double log_scale = log_gamma_variate(total, rng);
  for (double& x : log_theta) x += log_scale;
}

std::array<double, kNumOutcomes> rho_star_shapes(double d1) {
  return {d1, d1, d1, d1, 2.0 * d1, 2.0 * d1, 2.0 * d1, 2.0 * d1};
}

int rho_group(int g) { return g < 4 ? 0 : (g < 6 ? 1 : 2); }

double log_prior_rho(const NoiseVector& rho, double d1) {
  const std::array<double, 4> c1 = {d1, d1, d1, d1};
  const std::array<double, 2> c2 = {2.0 * d1, 2.0 * d1};
  return dirichlet_logpdf(std::span<const double>(rho.data(), 4), c1) +
         dirichlet_logpdf(std::span<const double>(rho.data() + 4, 2), c2) +
         dirichlet_logpdf(std::span<const double>(rho.data() + 6, 2), c2);
}

NoiseVector rho_from_log_star(std::span<const double, kNumOutcomes> log_star) {
  NoiseVector rho{};
  const std::array<std::pair<int, int>, 3> groups = {{{0, 4}, {4, 6}, {6, 8}}};
  for (const auto& [lo, hi] : groups) {
    const double norm = log_sum_exp(log_star.subspan(static_cast<std::size_t>(lo),
                                                     static_cast<std::size_t>(hi - lo)));
    for (int g = lo; g < hi; ++g) rho[static_cast<std::size_t>(g)] = std::exp(log_star[g] - norm);
  }
  return rho;
}

void sample_log_rho_star(std::span<double, kNumOutcomes> log_star, double d1, Rng& rng) {
  const auto shapes = rho_star_shapes(d1);
  for (int g = 0; g < kNumOutcomes; ++g) log_star[g] = log_gamma_variate(shapes[g], rng);
}

std::vector<double> theta_to_w(std::span<const double> theta) {
  double s = 0.0;
  for (double x : theta) {
    if (!(x > 0.0)) throw std::invalid_argument("theta must be positive");
    s += x;
  }
  std::vector<double> w(theta.begin(), theta.end());
  for (double& x : w) x /= s;
  return w;
}

std::vector<double> log_theta_to_w(std::span<const double> log_theta) {
  const double norm = log_sum_exp(log_theta);
  std::vector<double> w(log_theta.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_theta[i] - norm);
  return w;
}

}  // namespace pairclone
