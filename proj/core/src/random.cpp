#include "pairclone/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pairclone {

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

double log_gamma_variate(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
  if (shape >= 1.0) return std::log(std::gamma_distribution<double>(shape, 1.0)(rng));
  // Ga(a) = Ga(a + 1) * U^(1/a)
  const double g = std::gamma_distribution<double>(shape + 1.0, 1.0)(rng);
  double u = uniform01(rng);
  while (u <= 0.0) u = uniform01(rng);
  return std::log(g) + std::log(u) / shape;
}

void log_dirichlet_variate(std::span<const double> conc, std::span<double> out, Rng& rng) {
  if (conc.size() != out.size()) throw std::invalid_argument("dirichlet size mismatch");
  for (std::size_t i = 0; i < conc.size(); ++i) out[i] = log_gamma_variate(conc[i], rng);
  const double norm = log_sum_exp(out);
  for (double& x : out) x -= norm;
}

double log_sum_exp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

int sample_log_categorical(std::span<const double> log_weights, Rng& rng) {
  double m = -std::numeric_limits<double>::infinity();
  int argmax = -1;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    if (log_weights[i] > m) {
      m = log_weights[i];
      argmax = static_cast<int>(i);
    }
  }
  if (argmax < 0) throw std::domain_error("categorical distribution has no mass");
  double total = 0.0;
  for (double v : log_weights) total += std::exp(v - m);
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double mass = std::exp(log_weights[i] - m);
    if (u < mass) return static_cast<int>(i);
    u -= mass;
  }
  return argmax;  // rounding at the upper end
}

void multinomial_variate(long n, std::span<const double> p, std::span<double> out, Rng& rng) {
  if (p.size() != out.size()) throw std::invalid_argument("multinomial size mismatch");
  double remaining_mass = std::accumulate(p.begin(), p.end(), 0.0);
  long remaining = n;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (remaining == 0 || i + 1 == p.size()) {
      out[i] = static_cast<double>(i + 1 == p.size() ? remaining : 0);
      if (i + 1 == p.size()) break;
      continue;
    }
    const double prob = remaining_mass > 0.0 ? std::clamp(p[i] / remaining_mass, 0.0, 1.0) : 0.0;
    const long draw = std::binomial_distribution<long>(remaining, prob)(rng);
    out[i] = static_cast<double>(draw);
    remaining -= draw;
    remaining_mass -= p[i];
  }
}

}  // namespace pairclone
