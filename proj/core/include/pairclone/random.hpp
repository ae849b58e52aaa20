#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pairclone {

using Rng = std::mt19937_64;

// Independent, reproducible stream for (seed, stream id).
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

double uniform01(Rng& rng);

// log of a Gamma(shape, 1) draw; accurate for tiny shapes where the draw
// itself would underflow.
double log_gamma_variate(double shape, Rng& rng);

// Fills out[i] = log of a Dirichlet(conc) draw component.
void log_dirichlet_variate(std::span<const double> conc, std::span<double> out, Rng& rng);

// Index drawn with probability proportional to exp(log_weights[i]); entries of
// -inf have zero mass. Max-subtracted, so the scale of the logs is irrelevant.
int sample_log_categorical(std::span<const double> log_weights, Rng& rng);

double log_sum_exp(std::span<const double> values);

// Multinomial(n, p) counts; p need not be normalised exactly.
void multinomial_variate(long n, std::span<const double> p, std::span<double> out, Rng& rng);

}  // namespace pairclone
