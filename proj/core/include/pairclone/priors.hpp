#pragma once

// Prior densities and samplers. Simplex-valued parameters are represented on
// the log scale wherever they are sampled, because several concentrations are
// far below one and the corresponding draws underflow in linear space.

#include <array>
#include <span>
#include <vector>

#include "pairclone/random.hpp"
#include "pairclone/types.hpp"

namespace pairclone {

// p(C) = (1-r)^C r  (as_printed, sums to 1-r over C >= 1)
// p(C) = (1-r)^(C-1) r  (shifted, a proper distribution on C >= 1)
enum class GeometricForm { as_printed, shifted };

struct Hyperparams {
  double alpha = 4.0;
  double gamma = 2.0;
  double d0 = 0.03;
  double d = 0.5;
  double d1 = 1.0;
  double r = 0.4;
  double d1_star = 1.0;
  double d2_star = 1.0;
  int c_min = 1;
  int c_max = 10;
  GeometricForm geometric = GeometricForm::as_printed;

  void validate() const;
};

[[nodiscard]] double log_prior_C(int C, double r, GeometricForm form = GeometricForm::as_printed);

// pi_c1 ~ Be(1, first_b), (pi_c2..pi_cQ)/(1 - pi_c1) ~ Dir(gamma, ..., gamma).
// In the model first_b = alpha / C.
struct BetaDirichlet {
  double first_b = 1.0;
  double gamma = 1.0;

  // Fills log(pi) for a row of any length >= 2.
  void sample_log(std::span<double> log_pi, Rng& rng) const;
  [[nodiscard]] std::vector<double> sample(int categories, Rng& rng) const;

  // Density with respect to (pi_1, pi~_2, ..., pi~_{Q-1}). -inf off the open simplex.
  [[nodiscard]] double logpdf(std::span<const double> pi) const;
};

// Row-major C x 10 table of log pi_cq.
using LogColumnProbs = Matrix;

// m_cq counts of code q in column c.
[[nodiscard]] Matrix code_counts(const GenotypeMatrix& z);

[[nodiscard]] double log_prior_Z_given_pi(const GenotypeMatrix& z, const LogColumnProbs& log_pi);

[[nodiscard]] double dirichlet_logpdf(std::span<const double> x, std::span<const double> conc);

// Same density evaluated from log x, robust when components underflow.
[[nodiscard]] double dirichlet_logpdf_log(std::span<const double> log_x, std::span<const double> conc);

[[nodiscard]] double log_prior_w(std::span<const double> w_t, double d0, double d);

// w_star ~ Be(d1s, d2s) and w~_t = w_(0..C) / (1 - w_star) ~ Dir(d0, d, ..., d).
// w_tilde is passed already normalised.
[[nodiscard]] double log_prior_w_purity(double w_star, std::span<const double> w_tilde, double d1s,
                                        double d2s, double d0, double d);

// Weight prior for a row of J components, built from independent gammas
// theta_j ~ Ga(conc_j). One component may carry its own Beta(a, b) marginal
// while the remaining ones, renormalised, stay Dirichlet(conc_-s); this is
// implemented by tilting the gamma density with (1 - w_s)^(b - B),
// B = sum of the other concentrations.
struct WeightPrior {
  std::vector<double> conc;
  int special = -1;
  double special_b = 0.0;

  static WeightPrior flat(int subclones, double d0, double d);
  static WeightPrior purity(int subclones, double d0, double d, double d1s, double d2s);
  // Row layout (w0, w_normal, w2..wC); the normal clone is component 1.
  static WeightPrior tree(int subclones, double d0, double d, double a_p, double b_p);

  [[nodiscard]] int size() const { return static_cast<int>(conc.size()); }

  // Density of w on the simplex (Lebesgue on the first J-1 coordinates).
  [[nodiscard]] double logpdf(std::span<const double> w) const;
  [[nodiscard]] double logpdf_log(std::span<const double> log_w) const;

  // log density of the log-theta vector up to an additive constant:
  // sum_j [conc_j * phi_j - exp(phi_j)] + tilt. Includes the log-scale Jacobian.
  [[nodiscard]] double log_density_log_theta(std::span<const double> log_theta) const;

  // Exact draw of log theta (tilt realised by rejection-free construction:
  // w_s ~ Beta, rest ~ Dirichlet, then a Gamma total).
  void sample_log_theta(std::span<double> log_theta, Rng& rng) const;
  void sample_log_w(std::span<double> log_w, Rng& rng) const;
};

// rho_1..4 ~ Dir(d1 x4), (rho_5, rho_6) ~ Dir(2 d1 x2), (rho_7, rho_8) ~ Dir(2 d1 x2).
// Each group sums to one.
[[nodiscard]] double log_prior_rho(const NoiseVector& rho, double d1);

// Gamma shape for each outcome of the unscaled noise vector rho*.
[[nodiscard]] std::array<double, kNumOutcomes> rho_star_shapes(double d1);

// Group g belongs to: 0 for outcomes 1-4, 1 for 5-6, 2 for 7-8.
[[nodiscard]] int rho_group(int g);

// rho from log rho*, normalising within each group.
[[nodiscard]] NoiseVector rho_from_log_star(std::span<const double, kNumOutcomes> log_star);

void sample_log_rho_star(std::span<double, kNumOutcomes> log_star, double d1, Rng& rng);

// w_c = theta_c / sum theta.
[[nodiscard]] std::vector<double> theta_to_w(std::span<const double> theta);
[[nodiscard]] std::vector<double> log_theta_to_w(std::span<const double> log_theta);

}  // namespace pairclone
