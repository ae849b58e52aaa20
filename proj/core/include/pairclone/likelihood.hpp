#pragma once

// Observation model for mutation-pair read counts.
//
// A weight row w_t is laid out as
//   w_t[0]        background subclone (noise, weighted by rho)
//   w_t[1..C]     subclones, matching the columns of Z
//   w_t[C+1]      normal clone (optional; only when tumor purity is modeled)

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "pairclone/types.hpp"

namespace pairclone {

[[nodiscard]] std::array<double, kNumOutcomes> conditional_read_probs(const GenotypeMatrix& z,
                                                                      std::span<const double> w_t,
                                                                      const NoiseVector& rho, int k);

[[nodiscard]] ProbTable conditional_read_probs(const GenotypeMatrix& z, const Matrix& w,
                                               const NoiseVector& rho);

// (1/temper) * sum_{t,k,g} n_tkg log p~_tkg. Multinomial coefficients and the
// missing-class factors are constant in every sampled parameter and dropped.
// Returns -inf when some n_tkg > 0 meets p~_tkg == 0.
[[nodiscard]] double log_likelihood(const ReadCounts& counts, const GenotypeMatrix& z, const Matrix& w,
                                    const NoiseVector& rho, double temper = 1.0);

[[nodiscard]] double log_likelihood(const ReadCounts& counts, const ProbTable& probs);

// Single-SNV counts recorded as a right-missing pair: reference reads in
// class 0- and variant reads in class 1-.
[[nodiscard]] std::array<double, kNumOutcomes> embed_snv(long total, long variant);

struct MissingRates {
  int samples = 0;
  int pairs = 0;
  // rates[t * pairs + k] = (complete, left-missing, right-missing)
  std::vector<std::array<double, 3>> rates;
  std::vector<std::pair<int, int>> zero_coverage;

  [[nodiscard]] const std::array<double, 3>& at(int t, int k) const {
    return rates[static_cast<std::size_t>(t) * pairs + k];
  }
};

[[nodiscard]] MissingRates empirical_missing_rates(const ReadCounts& counts);

// p^_tkg - n_tkg / N_tk, with p^ = v^_class * p~. Zero-coverage cells are NaN.
[[nodiscard]] ReadCounts residuals(const ReadCounts& counts, const GenotypeMatrix& z, const Matrix& w,
                                   const NoiseVector& rho);

[[nodiscard]] double mean_abs_residual(const ReadCounts& resid);
[[nodiscard]] double max_abs_residual(const ReadCounts& resid);

}  // namespace pairclone
