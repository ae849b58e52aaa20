#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "pairclone/diagnostics.hpp"

using namespace pairclone;

namespace {

std::vector<double> normal_trace(std::size_t L, double sd, Rng& rng) {
  std::normal_distribution<double> n(0.0, sd);
  std::vector<double> x(L);
  for (double& v : x) v = n(rng);
  return x;
}

std::vector<double> ar1(std::size_t L, double phi, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(L);
  double prev = n(rng) / std::sqrt(1.0 - phi * phi);
  for (double& v : x) v = prev = phi * prev + n(rng);
  return x;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("spectral density at zero") {
    Rng rng = make_stream(50, 0);
    const auto iid = normal_trace(100000, 2.0, rng);
    CHECK(spectral_density_zero(iid) == doctest::Approx(4.0).epsilon(0.10));
    const auto ar = ar1(100000, 0.5, rng);
    CHECK(spectral_density_zero(ar) == doctest::Approx(4.0).epsilon(0.15));
    const std::vector<double> flat(1000, 3.0);
    CHECK(spectral_density_zero(flat) == 0.0);
    CHECK(default_bandwidth(200000) == 447);
    CHECK(default_bandwidth(100) == 10);
  }

  TEST_CASE("split-chain test on white noise") {
    Rng rng = make_stream(51, 0);
    int inside = 0;
    for (int rep = 0; rep < 100; ++rep) {
      const auto x = normal_trace(100000, 1.0, rng);
      const auto t = geweke_convergence(x);
      CHECK_FALSE(t.skipped);
      inside += std::abs(t.z) < 3.0;
    }
    CHECK(inside >= 99);
  }

  TEST_CASE("split-chain test sees a mean shift") {
    Rng rng = make_stream(52, 0);
    auto x = normal_trace(20000, 1.0, rng);
    for (std::size_t i = x.size() / 2; i < x.size(); ++i) x[i] += 0.2;
    CHECK(geweke_convergence(x).p < 0.001);
    const std::vector<double> flat(1000, 1.0);
    const auto t = geweke_convergence(flat);
    CHECK(t.skipped);
    CHECK_FALSE(t.note.empty());
    CHECK_THROWS(geweke_convergence(x, 0.6, 0.5));
  }

  TEST_CASE("bandwidth choice barely moves the statistic") {
    Rng rng = make_stream(53, 0);
    auto x = ar1(100000, 0.5, rng);
    for (std::size_t i = 0; i < 10000; ++i) x[i] += 0.1;
    const auto a = geweke_convergence(x);
    const auto b = geweke_convergence(x, 0.1, 0.5, 2 * default_bandwidth(10000));
    CHECK(std::abs(a.z) > 2.0);
    CHECK(std::abs(b.z - a.z) < 0.2 * std::abs(a.z));
  }

  TEST_CASE("two-sided p-values") {
    CHECK(two_sided_p(0.0) == 1.0);
    CHECK(two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(two_sided_p(-0.4736149) == doctest::Approx(0.636).epsilon(1e-3));
    CHECK(two_sided_p(0.1748906) == doctest::Approx(0.861).epsilon(1e-3));
  }

  TEST_CASE("autocorrelation") {
    Rng rng = make_stream(54, 0);
    const auto x = normal_trace(50000, 1.0, rng);
    const auto acf = autocorrelation(x, 50);
    CHECK(acf[0] == 1.0);
    int small = 0;
    for (int h = 1; h <= 50; ++h) small += std::abs(acf[static_cast<std::size_t>(h)]) < 3.0 / std::sqrt(50000.0);
    CHECK(small >= 48);
    const auto ar = autocorrelation(ar1(50000, 0.5, rng), 3);
    CHECK(ar[1] == doctest::Approx(0.5).epsilon(0.05));
    CHECK(ar[2] == doctest::Approx(0.25).epsilon(0.1));
  }

  TEST_CASE("goodness-of-fit helpers") {
    Rng rng = make_stream(55, 0);
    const auto x = normal_trace(20000, 1.0, rng);
    const auto phi = [](double v) { return 0.5 * std::erfc(-v / std::sqrt(2.0)); };
    CHECK(ks_test(x, phi).p > 0.01);
    auto shifted = x;
    for (double& v : shifted) v += 0.1;
    CHECK(ks_test(shifted, phi).p < 1e-6);

    const std::vector<double> obs = {18, 22, 20, 40};
    const std::vector<double> exp = {20, 20, 20, 40};
    const auto r = chi_square_test(obs, exp);
    CHECK(r.dof == 3);
    CHECK(r.statistic == doctest::Approx(0.4));
    CHECK(r.p == doctest::Approx(0.9402).epsilon(1e-3));
    const std::vector<double> bad_obs = {1, 0};
    const std::vector<double> bad_exp = {0, 1};
    CHECK(chi_square_test(bad_obs, bad_exp).p == 0.0);
  }

  TEST_CASE("trace export round trip") {
    Rng rng = make_stream(56, 0);
    const auto x = normal_trace(300, 1.0, rng);
    const auto dir = std::filesystem::temp_directory_path() / "pairclone_trace_test";
    std::filesystem::remove_all(dir);
    export_trace(dir, "w_1_2", x, 10);
    const auto trace = read_csv(dir / "trace_w_1_2.csv");
    REQUIRE(trace.size() == 301);
    CHECK(trace[0] == std::vector<std::string>{"iteration", "value"});
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::stoi(trace[i + 1][0]) == static_cast<int>(i) + 1);
      CHECK(std::stod(trace[i + 1][1]) == x[i]);
    }
    const auto acf = read_csv(dir / "acf_w_1_2.csv");
    REQUIRE(acf.size() == 12);
    CHECK(std::stod(acf[1][1]) == 1.0);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("histogram") {
    const std::vector<double> x = {-2.0, -0.5, 0.0, 0.1, 0.99, 1.0, NAN, 3.0};
    const auto h = histogram(x, -1.0, 1.0, 4);
    CHECK(h.below == 1);
    CHECK(h.above == 2);
    CHECK(h.counts == std::vector<long>{0, 1, 2, 1});
    CHECK_THROWS(histogram(x, 1.0, 1.0, 3));
  }

  TEST_CASE("statistic names and defaults") {
    CHECK(GewekeStatistic::weight(1, 2).name() == "w_1_2");
    CHECK(GewekeStatistic::prob(3, 60, 7).name() == "p_3_60_7");
    const auto d = default_geweke_statistics();
    CHECK(d.size() == 6);
    CHECK(d[0].name() == "w_1_2");
  }

  TEST_CASE("analytic prior means match prior draws") {
    for (const auto variant : {ModelVariant::flat, ModelVariant::purity}) {
      GewekeConfig cfg;
      cfg.spec.variant = variant;
      cfg.T = 4;
      cfg.K = 80;
      cfg.C = 3;
      const auto mc = prior_predictive_means(cfg, 40000);
      for (std::size_t s = 0; s < cfg.statistics.size(); ++s) {
        const double a = analytic_prior_mean(cfg.spec, cfg.C, cfg.statistics[s]);
        CHECK(std::abs(mc[s].mean - a) < 4.0 * mc[s].se);
      }
    }
    CHECK(analytic_prior_mean(ModelSpec{}, 2, GewekeStatistic::weight(1, 0)) == doctest::Approx(0.03 / 1.03));
  }

  TEST_CASE("joint test bookkeeping") {
    GewekeConfig cfg;
    cfg.T = 2;
    cfg.K = 10;
    cfg.C = 2;
    cfg.L = 500;
    cfg.statistics = {GewekeStatistic::weight(1, 1), GewekeStatistic::prob(2, 3, 5)};
    long calls = 0;
    const auto rep = geweke_joint(cfg, [&](long) { ++calls; });
    CHECK(rep.L == 500);
    CHECK(rep.bandwidth == default_bandwidth(500));
    CHECK(rep.analytic_means);
    REQUIRE(rep.results.size() == 2);
    for (const auto& r : rep.results) {
      CHECK(r.trace.size() == 500);
      CHECK(std::isfinite(r.test.z));
    }
    const auto again = geweke_joint(cfg);
    CHECK(again.results[0].trace == rep.results[0].trace);
    cfg.statistics = {GewekeStatistic::weight(1, 5)};
    CHECK_THROWS(geweke_joint(cfg));
    cfg.spec.variant = ModelVariant::tree;
    CHECK_THROWS(geweke_joint(cfg));
  }
}
