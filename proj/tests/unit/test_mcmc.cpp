#include <doctest.h>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <cmath>
#include <map>
#include <numeric>

#include "helpers.hpp"
#include "pairclone/diagnostics.hpp"
#include "pairclone/likelihood.hpp"
#include "pairclone/mcmc.hpp"
#include "pairclone/simulate.hpp"

using namespace pairclone;
using testing::moments;

namespace {

std::function<double(double)> gamma_cdf(double shape) {
  return [g = boost::math::gamma_distribution<double>(shape, 1.0)](double x) {
    return x <= 0.0 ? 0.0 : boost::math::cdf(g, x);
  };
}

std::function<double(double)> beta_cdf(double a, double b) {
  return [d = boost::math::beta_distribution<double>(a, b)](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return boost::math::cdf(d, x);
  };
}

ChainState fixed_state(int K, int C, int T, const ModelSpec& spec, Rng& rng) {
  ChainState s;
  s.z = GenotypeMatrix(K, C);
  s.log_pi = Matrix(C, kNumGenotypes);
  const BetaDirichlet bd{spec.hyper.alpha / C, spec.hyper.gamma};
  for (int c = 0; c < C; ++c) bd.sample_log(s.log_pi.row(c), rng);
  const auto wp = spec.weight_prior(C);
  s.log_theta = Matrix(T, wp.size());
  for (int t = 0; t < T; ++t) wp.sample_log_theta(s.log_theta.row(t), rng);
  sample_log_rho_star(s.log_rho_star, spec.hyper.d1, rng);
  return s;
}

// Replicates started from an exact prior draw on zero-count data and moved by
// `kernel` must still be prior draws.
template <class Kernel, class Record>
void replicate(Chain& chain, int C, const TreeTopology* tree, int replicates, int steps, Kernel kernel,
               Record record) {
  for (int r = 0; r < replicates; ++r) {
    chain.init_from_prior(C, tree);
    for (int s = 0; s < steps; ++s) kernel(chain);
    record(chain);
  }
}

// Ten-state toy target for the tempering ensemble.
struct ToyChain {
  const std::vector<double>* log_target;
  double temp;
  int state;
  Rng rng;

  void sweep() {
    const int proposal = std::uniform_int_distribution<int>(0, 9)(rng);
    const double log_r = ((*log_target)[static_cast<std::size_t>(proposal)] -
                          (*log_target)[static_cast<std::size_t>(state)]) / temp;
    if (std::log(uniform01(rng)) < log_r) state = proposal;
  }
  [[nodiscard]] double log_posterior() const { return (*log_target)[static_cast<std::size_t>(state)]; }
  [[nodiscard]] double temperature() const { return temp; }
  void set_temperature(double t) { temp = t; }
};

}  // namespace

TEST_SUITE("mcmc") {
  TEST_CASE("Z entry draws follow the enumerated conditional") {
    ModelSpec spec;
    Rng rng = make_stream(20, 0);
    ReadCounts n(2, 1);
    const std::array<double, 8> a = {5, 3, 2, 1, 2, 2, 3, 1};
    const std::array<double, 8> b = {0, 4, 0, 6, 1, 0, 0, 2};
    std::copy(a.begin(), a.end(), n.cell(0, 0).begin());
    std::copy(b.begin(), b.end(), n.cell(1, 0).begin());
    Chain chain(spec, n, 1.0, make_stream(20, 1));
    const ChainState s = fixed_state(1, 1, 2, spec, rng);
    chain.set_state(s);

    std::vector<double> log_mass(kNumGenotypes);
    for (int q = 0; q < kNumGenotypes; ++q) {
      GenotypeMatrix z(1, 1);
      z.set(0, 0, GenotypeCode::from_index(q));
      log_mass[static_cast<std::size_t>(q)] = s.log_pi(0, q) + log_likelihood(n, z, s.weights(), s.rho());
    }
    const double norm = log_sum_exp(log_mass);
    const int draws = 100000;
    std::vector<double> obs(kNumGenotypes, 0.0), expected(kNumGenotypes, 0.0);
    for (int i = 0; i < draws; ++i) {
      chain.update_Z_entry(0, 0);
      obs[static_cast<std::size_t>(chain.state().z.index(0, 0))] += 1.0;
    }
    for (int q = 0; q < kNumGenotypes; ++q) {
      expected[static_cast<std::size_t>(q)] = draws * std::exp(log_mass[static_cast<std::size_t>(q)] - norm);
    }
    // Pool cells with tiny expectations into their neighbours.
    std::vector<double> o, e;
    double po = 0.0, pe = 0.0;
    for (int q = 0; q < kNumGenotypes; ++q) {
      po += obs[static_cast<std::size_t>(q)];
      pe += expected[static_cast<std::size_t>(q)];
      if (pe >= 5.0) {
        o.push_back(po);
        e.push_back(pe);
        po = pe = 0.0;
      }
    }
    if (pe > 0.0) {
      o.back() += po;
      e.back() += pe;
    }
    CHECK(chi_square_test(o, e).p > 0.01);
  }

  TEST_CASE("Z pair draws follow the enumerated conditional") {
    ModelSpec spec;
    spec.variant = ModelVariant::purity;
    Rng rng = make_stream(30, 0);
    ReadCounts n(2, 1);
    const std::array<double, 8> a = {4, 3, 2, 2, 1, 2, 3, 1};
    const std::array<double, 8> b = {2, 1, 0, 5, 1, 0, 1, 2};
    std::copy(a.begin(), a.end(), n.cell(0, 0).begin());
    std::copy(b.begin(), b.end(), n.cell(1, 0).begin());
    Chain chain(spec, n, 1.0, make_stream(30, 1));
    ChainState s = fixed_state(1, 3, 2, spec, rng);
    s.z.set(0, 1, GenotypeCode(4));
    chain.set_state(s);

    std::vector<double> log_mass(kNumGenotypes * kNumGenotypes);
    for (int q1 = 0; q1 < kNumGenotypes; ++q1) {
      for (int q2 = 0; q2 < kNumGenotypes; ++q2) {
        GenotypeMatrix z = s.z;
        z.set(0, 0, GenotypeCode::from_index(q1));
        z.set(0, 2, GenotypeCode::from_index(q2));
        log_mass[static_cast<std::size_t>(q1 * kNumGenotypes + q2)] =
            s.log_pi(0, q1) + s.log_pi(2, q2) + log_likelihood(n, z, s.weights(), s.rho());
      }
    }
    const double norm = log_sum_exp(log_mass);
    const int draws = 200000;
    std::vector<double> obs(log_mass.size(), 0.0);
    for (int i = 0; i < draws; ++i) {
      chain.update_Z_pair(0, 0, 2);
      CHECK_UNARY(chain.state().z.index(0, 1) == 3);
      obs[static_cast<std::size_t>(chain.state().z.index(0, 0) * kNumGenotypes + chain.state().z.index(0, 2))] += 1.0;
    }
    std::vector<double> o, e;
    double po = 0.0, pe = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      po += obs[i];
      pe += draws * std::exp(log_mass[i] - norm);
      if (pe >= 5.0) {
        o.push_back(po);
        e.push_back(pe);
        po = pe = 0.0;
      }
    }
    if (pe > 0.0) {
      o.back() += po;
      e.back() += pe;
    }
    REQUIRE(o.size() > 5);
    CHECK(chi_square_test(o, e).p > 0.01);
  }

  TEST_CASE("Z entry with a point-mass column ignores the data") {
    ModelSpec spec;
    Rng rng = make_stream(21, 0);
    ReadCounts n(1, 1);
    n(0, 0, 3) = 50;
    Chain chain(spec, n, 1.0, make_stream(21, 1));
    ChainState s = fixed_state(1, 1, 1, spec, rng);
    for (int q = 0; q < kNumGenotypes; ++q) s.log_pi(0, q) = q == 6 ? 0.0 : -INFINITY;
    chain.set_state(s);
    for (int i = 0; i < 100; ++i) {
      chain.update_Z_entry(0, 0);
      CHECK(chain.state().z.index(0, 0) == 6);
    }
  }

  TEST_CASE("conjugate update of the column probabilities") {
    ModelSpec spec;
    spec.hyper.alpha = 1.0;
    spec.hyper.gamma = 2.0;
    Rng rng = make_stream(22, 0);
    const ReadCounts n(1, 3);
    Chain chain(spec, n, 1.0, make_stream(22, 1));
    ChainState s = fixed_state(3, 1, 1, spec, rng);
    s.z.set(2, 0, GenotypeCode(5));
    chain.set_state(s);
    std::vector<double> first, fifth;
    for (int i = 0; i < 100000; ++i) {
      chain.update_pi();
      const auto row = chain.state().log_pi.row(0);
      first.push_back(std::exp(row[0]));
      fifth.push_back(std::exp(row[4]) / (1.0 - std::exp(row[0])));
    }
    const auto m1 = moments(first);
    const auto m5 = moments(fifth);
    CHECK(std::abs(m1.mean - 0.6) < 3.0 * m1.se);
    CHECK(std::abs(m5.mean - 3.0 / 19.0) < 3.0 * m5.se);
  }

  TEST_CASE("kernels leave the prior invariant on zero-count data") {
    ModelSpec spec;
    const ReadCounts zero(2, 6);
    Chain chain(spec, zero, 1.0, make_stream(23, 0));
    const int C = 3;
    const int R = 5000;
    const int steps = 20;  // R * steps = 10^5 kernel applications

    SUBCASE("theta") {
      std::vector<double> t0, t1;
      replicate(chain, C, nullptr, R, steps, [](Chain& c) { c.update_theta(); }, [&](const Chain& c) {
        t0.push_back(std::exp(c.state().log_theta(0, 0)));
        t1.push_back(std::exp(c.state().log_theta(1, 2)));
      });
      CHECK(ks_test(t0, gamma_cdf(spec.hyper.d0)).p > 0.01);
      CHECK(ks_test(t1, gamma_cdf(spec.hyper.d)).p > 0.01);
      CHECK(chain.theta_stats().rate() > 0.5);
    }
    SUBCASE("rho star") {
      std::vector<double> r0, r6;
      replicate(chain, C, nullptr, R, steps, [](Chain& c) { c.update_rho_star(); }, [&](const Chain& c) {
        r0.push_back(std::exp(c.state().log_rho_star[0]));
        r6.push_back(std::exp(c.state().log_rho_star[6]));
      });
      CHECK(ks_test(r0, gamma_cdf(spec.hyper.d1)).p > 0.01);
      CHECK(ks_test(r6, gamma_cdf(2.0 * spec.hyper.d1)).p > 0.01);
    }
    SUBCASE("pi") {
      std::vector<double> p1;
      replicate(chain, C, nullptr, R, 1, [](Chain& c) { c.update_pi(); }, [&](const Chain& c) {
        p1.push_back(std::exp(c.state().log_pi(1, 0)));
      });
      CHECK(ks_test(p1, beta_cdf(1.0, spec.hyper.alpha / C)).p > 0.01);
    }
    SUBCASE("full sweep") {
      std::vector<double> t, r, p;
      replicate(chain, C, nullptr, R, steps, [](Chain& c) { c.sweep(); }, [&](const Chain& c) {
        t.push_back(std::exp(c.state().log_theta(0, 1)));
        r.push_back(std::exp(c.state().log_rho_star[4]));
        p.push_back(std::exp(c.state().log_pi(0, 0)));
      });
      CHECK(ks_test(t, gamma_cdf(spec.hyper.d)).p > 0.01);
      CHECK(ks_test(r, gamma_cdf(2.0 * spec.hyper.d1)).p > 0.01);
      CHECK(ks_test(p, beta_cdf(1.0, spec.hyper.alpha / C)).p > 0.01);
    }
  }

  TEST_CASE("a long chain on zero-count data recovers the prior mean") {
    ModelSpec spec;
    const ReadCounts zero(1, 2);
    Chain chain(spec, zero, 1.0, make_stream(24, 0));
    chain.init_from_prior(2);
    std::vector<double> w1;
    for (int i = 0; i < 100000; ++i) {
      chain.update_theta();
      w1.push_back(chain.weights()(0, 1));
    }
    // Batch means absorb the autocorrelation.
    std::vector<double> batches;
    for (std::size_t b = 0; b < 50; ++b) {
      batches.push_back(std::accumulate(w1.begin() + static_cast<long>(b * 2000), w1.begin() + static_cast<long>((b + 1) * 2000), 0.0) / 2000.0);
    }
    const auto m = moments(batches);
    CHECK(std::abs(m.mean - 0.5 / 1.03) < 4.0 * m.se);
  }

  TEST_CASE("tree rows and tilted weights under the prior") {
    ModelSpec spec;
    spec.variant = ModelVariant::tree;
    const ReadCounts zero(1, 2);
    const TreeTopology tree({0, 1, 1});
    Chain chain(spec, zero, 1.0, make_stream(25, 0));

    std::map<std::vector<int>, double> tally;
    std::vector<double> normal;
    const int R = 20000;
    replicate(chain, 3, &tree, R, 3,
              [](Chain& c) {
                c.update_Z_rows();
                c.update_theta();
              },
              [&](const Chain& c) {
                std::vector<int> key;
                for (int k = 0; k < 2; ++k) {
                  for (int col = 1; col < 3; ++col) key.push_back(c.state().z.index(k, col));
                }
                tally[key] += 1.0;
                normal.push_back(c.weights()(0, 1));
              });
    std::vector<double> obs, expected;
    double other_obs = 0.0, other_exp = 0.0;
    GenotypeMatrix z(2, 3);
    for (int v = 0; v < 10000; ++v) {
      const std::vector<int> key = {v % 10, v / 10 % 10, v / 100 % 10, v / 1000};
      z.set(0, 1, GenotypeCode::from_index(key[0]));
      z.set(0, 2, GenotypeCode::from_index(key[1]));
      z.set(1, 1, GenotypeCode::from_index(key[2]));
      z.set(1, 2, GenotypeCode::from_index(key[3]));
      const double e = R * std::exp(log_prior_Z_given_tree(z, tree, spec.lambda(2, 3)));
      const double o = tally.count(key) ? tally[key] : 0.0;
      if (e == 0.0) {
        CHECK(o == 0.0);
      } else if (e < 5.0) {
        other_obs += o;
        other_exp += e;
      } else {
        obs.push_back(o);
        expected.push_back(e);
      }
    }
    obs.push_back(other_obs);
    expected.push_back(other_exp);
    CHECK(chi_square_test(obs, expected).p > 0.01);
    const double a_p = spec.hyper.d;
    const double b_p = spec.hyper.d0 + 2.0 * spec.hyper.d;
    CHECK(ks_test(normal, beta_cdf(a_p, b_p)).p > 0.01);
  }

  TEST_CASE("tree row update with one node keeps the normal clone") {
    ModelSpec spec;
    spec.variant = ModelVariant::tree;
    ReadCounts n(1, 3);
    n(0, 1, 3) = 20;
    Chain chain(spec, n, 1.0, make_stream(26, 0));
    const TreeTopology root({0});
    chain.init_from_prior(1, &root);
    chain.update_Z_rows();
    for (int k = 0; k < 3; ++k) CHECK(chain.state().z.index(k, 0) == 0);
  }

  TEST_CASE("tempering ensemble reproduces a toy target") {
    const std::vector<double> log_target = {0.0, 1.0, 2.5, 0.3, -1.0, 3.0, 0.0, 2.0, -0.5, 1.5};
    std::vector<ToyChain> chains;
    const std::vector<double> ladder = {3.0, 1.8, 1.0};
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      chains.push_back(ToyChain{&log_target, ladder[i], 0, make_stream(27, i)});
    }
    TemperedEnsemble<ToyChain> ens(std::move(chains), 0.7, make_stream(27, 99));
    std::vector<double> obs(10, 0.0);
    const int samples = 40000;
    for (int i = 0; i < samples; ++i) {
      for (int s = 0; s < 10; ++s) ens.step();
      obs[static_cast<std::size_t>(ens.cold().state)] += 1.0;
    }
    const double norm = log_sum_exp(log_target);
    std::vector<double> expected;
    for (double lt : log_target) expected.push_back(samples * std::exp(lt - norm));
    CHECK(chi_square_test(obs, expected).p > 0.01);
    for (std::size_t i = 0; i < ens.chains().size(); ++i) CHECK(ens.chains()[i].temperature() == ladder[i]);
    CHECK(ens.swap_stats()[1].accepted > 0);
  }

  TEST_CASE("swaps between identical targets always succeed") {
    const std::vector<double> log_target(10, 0.0);
    std::vector<ToyChain> chains;
    for (int i = 0; i < 2; ++i) chains.push_back(ToyChain{&log_target, 1.0 + i, i, make_stream(28, i)});
    TemperedEnsemble<ToyChain> flat(std::move(chains), 0.0, make_stream(28, 9));
    for (int i = 0; i < 1000; ++i) flat.step();
    CHECK(flat.swap_stats()[0].proposed == 1000);
    CHECK(flat.swap_stats()[0].accepted == 1000);

    const std::vector<double> varied = {0.0, 4.0, -3.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    std::vector<ToyChain> same;
    for (int i = 0; i < 2; ++i) same.push_back(ToyChain{&varied, 1.0, 2 * i, make_stream(29, i)});
    TemperedEnsemble<ToyChain> equal(std::move(same), 0.0, make_stream(29, 9));
    for (int i = 0; i < 1000; ++i) equal.step();
    CHECK(equal.swap_stats()[0].accepted == 1000);
  }

  TEST_CASE("ladder validation") {
    CHECK_NOTHROW(validate_ladder(default_ladder()));
    CHECK(default_ladder().size() == 10);
    CHECK_THROWS(validate_ladder({2.0, 1.5}));
    CHECK_THROWS(validate_ladder({1.5, 2.0, 1.0}));
    CHECK_THROWS(validate_ladder({}));
  }

  TEST_CASE("fractional split") {
    ReadCounts n(1, 1);
    n(0, 0, 0) = 100;
    const auto s = split_counts(n, 0.95);
    CHECK(s.train(0, 0, 0) == doctest::Approx(95.0));
    CHECK(s.test(0, 0, 0) == doctest::Approx(5.0));

    Rng rng = make_stream(30, 0);
    const auto big = testing::random_counts(3, 20, 80, rng);
    const auto s2 = split_counts(big, 0.987);
    for (std::size_t i = 0; i < big.data().size(); ++i) CHECK_UNARY(s2.train.data()[i] + s2.test.data()[i] == big.data()[i]);
    CHECK_THROWS(split_counts(n, 1.0));

    const auto data = generate(preset("sim1"), 1);
    const double b = choose_b(data.counts);
    CHECK(b == doctest::Approx(0.992).epsilon(0.001));
    CHECK(std::abs((1.0 - b) * data.counts.grand_total() - 160.0) < 1.0);
    CHECK_THROWS(choose_b(n, 1000.0));
  }

  TEST_CASE("trans-dimensional acceptance") {
    ModelSpec flat;
    flat.hyper.r = 0.4;
    CHECK(transdim_log_acceptance(-10.0, 0.0, -10.0, 0.0) == 0.0);
    const double lr = transdim_log_acceptance(-10.0, log_model_prior(flat, 2, nullptr, nullptr), -10.0,
                                              log_model_prior(flat, 3, nullptr, nullptr));
    CHECK(std::exp(lr) == doctest::Approx(0.6));

    // The ratio sees the data only through the held-out part.
    Rng rng = make_stream(31, 0);
    const auto z = testing::random_z(5, 2, rng);
    const auto w = testing::random_w(1, 3, rng);
    const auto rho = testing::random_rho(rng);
    const auto counts = testing::random_counts(1, 5, 60, rng);
    auto split = split_counts(counts, 0.9);
    const auto probs = conditional_read_probs(z, w, rho);
    const double before = test_log_likelihood(split.test, probs);
    for (double& x : split.train.data()) x = 0.0;
    CHECK(test_log_likelihood(split.test, probs) == before);

    ModelSpec tree;
    tree.variant = ModelVariant::tree;
    const TopologySpace space(2, 4, tree.tree.beta);
    const TreeTopology t({0, 1, 2});
    CHECK(log_model_prior(tree, 3, &t, &space) ==
          doctest::Approx(log_prior_tree_size(3, tree.tree.alpha) + space.log_prob_given_C(t)));
  }

  TEST_CASE("chains report untempered quantities") {
    ModelSpec spec;
    const auto data = generate(preset("sim1"), 3);
    Chain hot(spec, data.counts, 3.0, make_stream(32, 0));
    hot.init_from_prior(2);
    const auto& s = hot.state();
    CHECK(hot.log_likelihood() == doctest::Approx(log_likelihood(data.counts, s.z, s.weights(), s.rho())));
    for (int i = 0; i < 200; ++i) hot.sweep();
    CHECK(hot.theta_stats().rate() > 0.1);
    CHECK(hot.theta_stats().rate() < 0.9);
  }

  TEST_CASE("acceptance rate on simulated data stays in a sane band") {
    ModelSpec spec;
    const auto data = generate(preset("sim1"), 4);
    Chain chain(spec, data.counts, 1.0, make_stream(33, 0));
    chain.init_from_prior(2);
    for (int i = 0; i < 300; ++i) chain.sweep();
    CHECK(chain.theta_stats().rate() > 0.1);
    CHECK(chain.theta_stats().rate() < 0.9);
    CHECK(chain.rho_stats().rate() > 0.1);
  }

  TEST_CASE("same seed gives the same draws") {
    ModelSpec spec;
    const auto data = generate(preset("sim1"), 5);
    SamplerConfig cfg;
    cfg.iters = 200;
    cfg.burnin = 100;
    cfg.thin = 10;
    cfg.ladder = {2.0, 1.0};
    cfg.c_max = 4;
    cfg.candidate_warmup = 20;
    cfg.seed = 77;
    const auto a = run_fit(data.counts, spec, cfg);
    const auto b = run_fit(data.counts, spec, cfg);
    REQUIRE(a.samples.draws.size() == 10);
    REQUIRE(a.samples.draws.size() == b.samples.draws.size());
    for (std::size_t i = 0; i < a.samples.draws.size(); ++i) {
      CHECK(a.samples.draws[i].z == b.samples.draws[i].z);
      CHECK(a.samples.draws[i].w == b.samples.draws[i].w);
      CHECK(a.samples.draws[i].log_lik == b.samples.draws[i].log_lik);
    }
    CHECK(a.telemetry.trace_C == b.telemetry.trace_C);
    cfg.seed = 78;
    const auto c = run_fit(data.counts, spec, cfg);
    CHECK(c.telemetry.trace_loglik != a.telemetry.trace_loglik);
  }

  TEST_CASE("sampler configuration validation") {
    SamplerConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.burnin = cfg.iters;
    CHECK_THROWS(cfg.validate());
    cfg = SamplerConfig{};
    cfg.c_min = 3;
    cfg.c_max = 2;
    CHECK_THROWS(cfg.validate());
    cfg = SamplerConfig{};
    cfg.initial_C = 11;
    CHECK_THROWS(cfg.validate());
    CHECK(parse_model_variant(to_string(ModelVariant::purity)) == ModelVariant::purity);
  }
}
