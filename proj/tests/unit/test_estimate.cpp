#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "pairclone/estimate.hpp"

using namespace pairclone;
using testing::random_rho;
using testing::random_w;
using testing::random_z;

namespace {

GenotypeMatrix filled(int K, int C, int code) { return GenotypeMatrix(K, C, GenotypeCode(code)); }

PosteriorDraw draw_of(const GenotypeMatrix& z, Rng& rng, double log_post = 0.0) {
  PosteriorDraw d;
  d.z = z;
  d.w = random_w(1, z.subclones() + 1, rng);
  d.rho = random_rho(rng);
  d.log_post = log_post;
  return d;
}

long brute_force_distance(const GenotypeMatrix& a, const GenotypeMatrix& b) {
  std::vector<int> perm(static_cast<std::size_t>(a.subclones()));
  std::iota(perm.begin(), perm.end(), 0);
  long best = -1;
  do {
    long d = 0;
    for (int c = 0; c < a.subclones(); ++c) d += column_distance(a, b, c, perm[static_cast<std::size_t>(c)]);
    if (best < 0 || d < best) best = d;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_SUITE("estimate") {
  TEST_CASE("column distances") {
    const auto a = filled(7, 1, 1);
    CHECK(column_distance(a, a, 0, 0) == 0);
    CHECK(column_distance(a, filled(7, 1, 10), 0, 0) == 28);
    CHECK(column_distance(filled(1, 1, 4), filled(1, 1, 6), 0, 0) == 2);
    CHECK_THROWS(column_distance(a, filled(6, 1, 1), 0, 0));
  }

  TEST_CASE("distance after column alignment") {
    Rng rng = make_stream(40, 0);
    const auto z = random_z(12, 4, rng);
    const std::vector<int> order = {3, 1, 0, 2};
    const auto swapped = z.permute_columns(order);
    CHECK(z_distance(z, swapped) == 0);
    CHECK(z_distance(z, z) == 0);
    const auto y = random_z(12, 4, rng);
    CHECK(z_distance(z, y) == z_distance(y, z));
    CHECK(z_distance(z, y) == brute_force_distance(z, y));
    const auto al = align_columns(swapped, z);
    for (int c = 0; c < 4; ++c) CHECK(al.match[static_cast<std::size_t>(c)] == order[static_cast<std::size_t>(c)]);
    CHECK_THROWS(z_distance(z, random_z(12, 3, rng)));
  }

  TEST_CASE("assignment solver agrees with exhaustive search") {
    Rng rng = make_stream(41, 0);
    for (int rep = 0; rep < 100; ++rep) {
      const auto a = random_z(15, 5, rng);
      const auto b = random_z(15, 5, rng);
      std::vector<long> cost(25);
      for (int c = 0; c < 5; ++c) {
        for (int d = 0; d < 5; ++d) cost[static_cast<std::size_t>(c * 5 + d)] = column_distance(a, b, c, d);
      }
      const auto ex = assign_exhaustive(cost, 5);
      const auto hu = assign_hungarian(cost, 5);
      CHECK(ex.distance == hu.distance);
      long check = 0;
      for (int c = 0; c < 5; ++c) check += cost[static_cast<std::size_t>(c * 5 + hu.match[static_cast<std::size_t>(c)])];
      CHECK(check == hu.distance);
      std::vector<int> m = hu.match;
      std::sort(m.begin(), m.end());
      CHECK(m == std::vector<int>{0, 1, 2, 3, 4});
    }
    // Wider problems exercise the solver used above eight columns.
    for (int rep = 0; rep < 20; ++rep) {
      const auto a = random_z(10, 10, rng);
      const auto b = a.permute_columns(std::vector<int>{9, 8, 7, 6, 5, 4, 3, 2, 1, 0});
      CHECK(z_distance(a, b) == 0);
    }
    std::uniform_int_distribution<long> u(0, 50);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<long> cost(64);
      for (auto& x : cost) x = u(rng);
      CHECK(assign_hungarian(cost, 8).distance == assign_exhaustive(cost, 8).distance);
    }
  }

  TEST_CASE("distance is a pseudometric") {
    Rng rng = make_stream(42, 0);
    for (int rep = 0; rep < 1000; ++rep) {
      const auto a = random_z(6, 3, rng);
      const auto b = random_z(6, 3, rng);
      const auto c = random_z(6, 3, rng);
      const long ab = z_distance(a, b);
      const long bc = z_distance(b, c);
      const long ac = z_distance(a, c);
      CHECK_UNARY(ab >= 0);
      CHECK_UNARY(ab == z_distance(b, a));
      CHECK_UNARY(ac <= ab + bc);
    }
  }

  TEST_CASE("point estimate minimises the total distance") {
    Rng rng = make_stream(43, 0);
    PosteriorSamples s;
    const auto base = random_z(8, 3, rng);
    for (int i = 0; i < 5; ++i) s.draws.push_back(draw_of(base, rng));
    CHECK(select_point_estimate(s, 3).draw == 0);

    auto outlier = base;
    for (int k = 0; k < 8; ++k) outlier.set(k, 0, GenotypeCode(10));
    s.draws.insert(s.draws.begin(), draw_of(outlier, rng));
    s.draws.push_back(draw_of(random_z(8, 2, rng), rng));
    const auto pe = select_point_estimate(s, 3);
    CHECK(pe.draw == 1);
    CHECK(pe.z == base);
    CHECK(pe.w == s.draws[1].w);
    CHECK(pe.rho == s.draws[1].rho);
    CHECK_THROWS(select_point_estimate(s, 4));
  }

  TEST_CASE("point estimate ignores a global relabelling") {
    Rng rng = make_stream(44, 0);
    PosteriorSamples s;
    const auto centre = random_z(10, 4, rng);
    for (int i = 0; i < 40; ++i) {
      auto z = centre;
      for (int e = 0; e < 1 + i % 4; ++e) {
        z.set(static_cast<int>(uniform01(rng) * 10), static_cast<int>(uniform01(rng) * 4),
              GenotypeCode::from_index(static_cast<int>(uniform01(rng) * 10)));
      }
      s.draws.push_back(draw_of(z, rng));
    }
    PosteriorSamples relabelled = s;
    const std::vector<int> order = {2, 3, 1, 0};
    for (auto& d : relabelled.draws) d.z = d.z.permute_columns(order);
    CHECK(select_point_estimate(s, 4).draw == select_point_estimate(relabelled, 4).draw);
  }

  TEST_CASE("posterior of C") {
    Rng rng = make_stream(45, 0);
    PosteriorSamples s;
    const int cs[] = {3, 2, 3, 1, 2, 3, 2, 4};
    for (int c : cs) s.draws.push_back(draw_of(random_z(2, c, rng), rng));
    const auto post = posterior_of_C(s);
    double total = 0.0;
    for (const auto& [c, p] : post.prob) {
      total += p;
      CHECK(p == static_cast<double>(std::count(std::begin(cs), std::end(cs), c)) / 8.0);
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(post.mode == 2);  // 2 and 3 tie; the smaller wins

    PosteriorSamples all3;
    for (int i = 0; i < 4; ++i) all3.draws.push_back(draw_of(random_z(2, 3, rng), rng));
    const auto p3 = posterior_of_C(all3);
    CHECK(p3.prob.size() == 1);
    CHECK(p3.prob.at(3) == 1.0);
    CHECK(p3.mode == 3);
  }

  TEST_CASE("tree posterior and MAP draw") {
    Rng rng = make_stream(46, 0);
    PosteriorSamples s;
    s.variant = ModelVariant::tree;
    const TreeTopology a({0, 1, 1, 2});
    const TreeTopology a_relabelled({0, 1, 1, 3});
    const TreeTopology chain({0, 1, 2, 3});
    const double posts[] = {-5.0, -2.0, -7.0, -2.0, -1.0};
    const TreeTopology* trees[] = {&a, &a_relabelled, &chain, &a, &chain};
    for (int i = 0; i < 5; ++i) {
      auto d = draw_of(GenotypeMatrix(3, 4), rng, posts[i]);
      d.tree = *trees[i];
      s.draws.push_back(d);
    }
    const auto tp = tree_posterior(s);
    REQUIRE(tp.size() == 2);
    CHECK(tp[0].prob == doctest::Approx(0.6));
    CHECK(tp[1].prob == doctest::Approx(0.4));
    CHECK(tp[1].tree == chain);

    const auto map = map_estimate(s, a_relabelled);
    CHECK(map.draw == 1);  // ties go to the earlier draw
    CHECK(map_estimate(s, chain).draw == 4);
    CHECK_THROWS(map_estimate(s, TreeTopology({0, 1, 1, 1})));
  }

  TEST_CASE("canonical fit keeps the normal weight in place") {
    const TreeTopology t({0, 1, 1, 3});
    GenotypeMatrix z(1, 4);
    z.set(0, 1, GenotypeCode(3));
    z.set(0, 2, GenotypeCode(2));
    z.set(0, 3, GenotypeCode(4));
    Matrix w(1, 5);
    for (int j = 0; j < 5; ++j) w(0, j) = 0.1 * (j + 1);
    const auto fit = canonical_fit(t, z, w);
    CHECK(fit.w(0, 0) == w(0, 0));
    CHECK(fit.w(0, 1) == w(0, 1));
    CHECK(fit.z.index(0, 0) == 0);
    double total = 0.0;
    for (int j = 0; j < 5; ++j) total += fit.w(0, j);
    CHECK(total == doctest::Approx(1.5));
    // Node 3 has a child, so it sorts ahead of the leaf node 2.
    CHECK(fit.tree == TreeTopology({0, 1, 1, 2}));
    CHECK(fit.z.index(0, 1) == 1);
    CHECK(fit.z.index(0, 2) == 2);
    CHECK(fit.w(0, 2) == w(0, 3));
    CHECK(fit.w(0, 3) == w(0, 2));
  }

  TEST_CASE("mismatched entries and aligned weights") {
    Rng rng = make_stream(47, 0);
    const auto z = random_z(20, 3, rng);
    const std::vector<int> order = {1, 2, 0};
    auto other = z.permute_columns(order);
    other.set(5, 0, GenotypeCode::from_index((other.index(5, 0) + 1) % 10));
    CHECK(mismatched_entries(z, other) == 1);

    Matrix w(1, 4);
    w(0, 0) = 0.1;
    w(0, 1) = 0.2;
    w(0, 2) = 0.3;
    w(0, 3) = 0.4;
    const auto zp = z.permute_columns(order);
    Matrix wp(1, 4);
    wp(0, 0) = 0.1;
    for (int c = 0; c < 3; ++c) wp(0, c + 1) = w(0, order[static_cast<std::size_t>(c)] + 1);
    const auto back = align_weights(zp, wp, z);
    for (int j = 0; j < 4; ++j) CHECK(back(0, j) == w(0, j));
  }
}
