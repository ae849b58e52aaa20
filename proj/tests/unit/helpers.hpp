#pragma once

#include <cmath>
#include <vector>

#include "pairclone/genotype.hpp"
#include "pairclone/priors.hpp"
#include "pairclone/random.hpp"
#include "pairclone/types.hpp"

namespace testing {

using namespace pairclone;

inline GenotypeMatrix random_z(int K, int C, Rng& rng) {
  std::uniform_int_distribution<int> code(0, kNumGenotypes - 1);
  GenotypeMatrix z(K, C);
  for (int k = 0; k < K; ++k) {
    for (int c = 0; c < C; ++c) z.set(k, c, GenotypeCode::from_index(code(rng)));
  }
  return z;
}

inline Matrix random_w(int T, int J, Rng& rng) {
  Matrix w(T, J);
  std::vector<double> conc(static_cast<std::size_t>(J), 1.0), lw(static_cast<std::size_t>(J));
  for (int t = 0; t < T; ++t) {
    log_dirichlet_variate(conc, lw, rng);
    for (int j = 0; j < J; ++j) w(t, j) = std::exp(lw[static_cast<std::size_t>(j)]);
  }
  return w;
}

inline NoiseVector random_rho(Rng& rng) {
  std::array<double, kNumOutcomes> ls{};
  sample_log_rho_star(ls, 1.0, rng);
  return rho_from_log_star(ls);
}

inline ReadCounts random_counts(int T, int K, int max_count, Rng& rng) {
  std::uniform_int_distribution<int> n(0, max_count);
  ReadCounts out(T, K);
  for (double& x : out.data()) x = n(rng);
  return out;
}

// Mean and standard error.
struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

inline Moments moments(const std::vector<double>& x) {
  double s = 0.0, s2 = 0.0;
  for (double v : x) {
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(x.size());
  const double m = s / n;
  return {m, std::sqrt(std::max(0.0, s2 / n - m * m) / n)};
}

}  // namespace testing
