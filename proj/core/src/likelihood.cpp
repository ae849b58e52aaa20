#include "pairclone/likelihood.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pairclone {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_weight_row(const GenotypeMatrix& z, std::size_t width) {
  const auto c = static_cast<std::size_t>(z.subclones());
  if (width != c + 1 && width != c + 2) {
    throw std::invalid_argument("weight row has " + std::to_string(width) + " entries for " +
                                std::to_string(c) + " subclones");
  }
}

int class_of(int g) { return g < 4 ? 0 : (g < 6 ? 1 : 2); }

}  // namespace

std::array<double, kNumOutcomes> conditional_read_probs(const GenotypeMatrix& z,
                                                        std::span<const double> w_t,
                                                        const NoiseVector& rho, int k) {
  check_weight_row(z, w_t.size());
  if (k < 0 || k >= z.pairs()) throw std::out_of_range("pair index out of range");
  const auto& table = match_table();
  const int subclones = z.subclones();
  std::array<double, kNumOutcomes> p{};
  for (int g = 0; g < kNumOutcomes; ++g) p[g] = w_t[0] * rho[g];
  for (int c = 0; c < subclones; ++c) {
    const auto& a = table[z.index(k, c)];
    const double wc = w_t[c + 1];
    for (int g = 0; g < kNumOutcomes; ++g) p[g] += wc * a[g];
  }
  if (w_t.size() == static_cast<std::size_t>(subclones) + 2) {
    const auto& a = table[kReferenceGenotype.index()];
    const double normal = w_t[subclones + 1];
    for (int g = 0; g < kNumOutcomes; ++g) p[g] += normal * a[g];
  }
  return p;
}

ProbTable conditional_read_probs(const GenotypeMatrix& z, const Matrix& w, const NoiseVector& rho) {
  ProbTable probs(w.rows(), z.pairs());
  for (int t = 0; t < w.rows(); ++t) {
    for (int k = 0; k < z.pairs(); ++k) {
      const auto p = conditional_read_probs(z, w.row(t), rho, k);
      std::copy(p.begin(), p.end(), probs.cell(t, k).begin());
    }
  }
  return probs;
}

double log_likelihood(const ReadCounts& counts, const ProbTable& probs) {
  if (counts.samples() != probs.samples() || counts.pairs() != probs.pairs()) {
    throw std::invalid_argument("count and probability tables differ in shape");
  }
  const auto& n = counts.data();
  const auto& p = probs.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] > 0.0) sum += n[i] * std::log(p[i]);
  }
  return sum;
}

double log_likelihood(const ReadCounts& counts, const GenotypeMatrix& z, const Matrix& w,
                      const NoiseVector& rho, double temper) {
  if (counts.pairs() != z.pairs() || counts.samples() != w.rows()) {
    throw std::invalid_argument("counts do not match genotype/weight dimensions");
  }
  if (!(temper > 0.0)) throw std::invalid_argument("temperature must be positive");
  return log_likelihood(counts, conditional_read_probs(z, w, rho)) / temper;
}

std::array<double, kNumOutcomes> embed_snv(long total, long variant) {
  if (variant < 0 || total < 0 || variant > total) {
    throw std::invalid_argument("SNV counts need 0 <= variant <= total (got " + std::to_string(variant) +
                                " of " + std::to_string(total) + ")");
  }
  std::array<double, kNumOutcomes> n{};
  n[6] = static_cast<double>(total - variant);
  n[7] = static_cast<double>(variant);
  return n;
}

MissingRates empirical_missing_rates(const ReadCounts& counts) {
  MissingRates out;
  out.samples = counts.samples();
  out.pairs = counts.pairs();
  out.rates.resize(static_cast<std::size_t>(out.samples) * out.pairs);
  for (int t = 0; t < out.samples; ++t) {
    for (int k = 0; k < out.pairs; ++k) {
      std::array<double, 3> sums{};
      for (int g = 0; g < kNumOutcomes; ++g) sums[class_of(g)] += counts(t, k, g);
      const double total = sums[0] + sums[1] + sums[2];
      auto& v = out.rates[static_cast<std::size_t>(t) * out.pairs + k];
      if (total > 0.0) {
        v = {sums[0] / total, sums[1] / total, sums[2] / total};
      } else {
        v = {0.0, 0.0, 0.0};
        out.zero_coverage.emplace_back(t, k);
      }
    }
  }
  return out;
}

ReadCounts residuals(const ReadCounts& counts, const GenotypeMatrix& z, const Matrix& w,
                     const NoiseVector& rho) {
  const MissingRates v = empirical_missing_rates(counts);
  ReadCounts out(counts.samples(), counts.pairs());
  for (int t = 0; t < counts.samples(); ++t) {
    for (int k = 0; k < counts.pairs(); ++k) {
      const double total = counts.total(t, k);
      auto r = out.cell(t, k);
      if (total <= 0.0) {
        std::fill(r.begin(), r.end(), kNaN);
        continue;
      }
      const auto p = conditional_read_probs(z, w.row(t), rho, k);
      const auto& rates = v.at(t, k);
      for (int g = 0; g < kNumOutcomes; ++g) {
        r[g] = rates[class_of(g)] * p[g] - counts(t, k, g) / total;
      }
    }
  }
  return out;
}

double mean_abs_residual(const ReadCounts& resid) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : resid.data()) {
    if (std::isnan(x)) continue;
    sum += std::abs(x);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double max_abs_residual(const ReadCounts& resid) {
  double m = 0.0;
  for (double x : resid.data()) {
    if (!std::isnan(x)) m = std::max(m, std::abs(x));
  }
  return m;
}

}  // namespace pairclone
