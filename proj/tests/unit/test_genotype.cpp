#include <doctest.h>

#include <map>
#include <set>

#include "pairclone/genotype.hpp"

using namespace pairclone;

namespace {

AlleleMatrix m(int r1, int r2) { return AlleleMatrix::from_rows(r1, r2); }
ReadOutcome h(int g) { return ReadOutcome{g}; }
GenotypeCode q(int v) { return GenotypeCode(v); }

}  // namespace

TEST_SUITE("genotype") {
  TEST_CASE("canonical codes of known matrices") {
    CHECK(canonicalize(m(0b00, 0b00)).value() == 1);
    CHECK(canonicalize(m(0b10, 0b01)).value() == 6);
    CHECK(canonicalize(m(0b01, 0b10)).value() == 6);
    CHECK(canonicalize(m(0b11, 0b10)).value() == 9);
    CHECK(canonicalize(m(0b11, 0b11)).value() == 10);
  }

  TEST_CASE("representatives follow the list order") {
    CHECK(representative(q(1)) == m(0b00, 0b00));
    CHECK(representative(q(4)) == m(0b00, 0b11));
    CHECK(representative(q(7)) == m(0b01, 0b11));
    CHECK(representative(q(8)) == m(0b10, 0b10));
    CHECK(representative(q(10)) == m(0b11, 0b11));
    CHECK_THROWS(GenotypeCode(0));
    CHECK_THROWS(GenotypeCode(11));
  }

  TEST_CASE("canonicalize inverts representative") {
    for (int v = 1; v <= kNumGenotypes; ++v) CHECK(canonicalize(representative(q(v))).value() == v);
  }

  TEST_CASE("sixteen matrices collapse onto ten codes") {
    std::map<int, int> preimage;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        const AlleleMatrix x = m(a, b);
        CHECK(canonicalize(x) == canonicalize(x.mirrored()));
        ++preimage[canonicalize(x).value()];
      }
    }
    CHECK(preimage.size() == 10);
    for (const auto& [code, n] : preimage) CHECK((n == 1 || n == 2));
  }

  TEST_CASE("match probabilities of worked cases") {
    CHECK(match_prob(h(1), q(1)) == 1.0);
    CHECK(match_prob(h(2), q(4)) == 0.0);
    CHECK(match_prob(h(6), q(2)) == 0.5);
    CHECK(match_prob(h(4), q(4)) == 0.5);
  }

  TEST_CASE("match probabilities sum to one within each read class") {
    for (int v = 1; v <= kNumGenotypes; ++v) {
      const GenotypeCode c = q(v);
      CHECK(match_prob(h(1), c) + match_prob(h(2), c) + match_prob(h(3), c) + match_prob(h(4), c) == 1.0);
      CHECK(match_prob(h(5), c) + match_prob(h(6), c) == 1.0);
      CHECK(match_prob(h(7), c) + match_prob(h(8), c) == 1.0);
    }
  }

  TEST_CASE("match probability ignores allele order") {
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        for (int g = 1; g <= kNumOutcomes; ++g) {
          CHECK(match_prob(h(g), m(a, b)) == match_prob(h(g), m(b, a)));
          CHECK(match_prob(h(g), m(a, b)) == match_prob(h(g), canonicalize(m(a, b))));
        }
      }
    }
  }

  TEST_CASE("read classes") {
    for (int g = 1; g <= 4; ++g) CHECK(h(g).read_class() == ReadClass::complete);
    CHECK(h(5).read_class() == ReadClass::left_missing);
    CHECK(h(6).read_class() == ReadClass::left_missing);
    CHECK(h(7).read_class() == ReadClass::right_missing);
    CHECK(h(8).read_class() == ReadClass::right_missing);
    CHECK(h(5).label() == "-0");
    CHECK(h(8).label() == "1-");
  }

  TEST_CASE("both file orderings are bijections that differ only at 7 and 8") {
    std::set<int> a, b;
    for (int v = 1; v <= kNumGenotypes; ++v) {
      const int x = external_code(q(v), CodeOrdering::pairclone);
      const int y = external_code(q(v), CodeOrdering::pairclone_tree);
      a.insert(x);
      b.insert(y);
      CHECK(from_external(x, CodeOrdering::pairclone) == q(v));
      CHECK(from_external(y, CodeOrdering::pairclone_tree) == q(v));
      if (v != 7 && v != 8) CHECK(x == y);
    }
    CHECK(a.size() == 10);
    CHECK(b.size() == 10);
    CHECK(representative(from_external(7, CodeOrdering::pairclone_tree)) == m(0b10, 0b10));
    CHECK(representative(from_external(8, CodeOrdering::pairclone_tree)) == m(0b01, 0b11));
    CHECK(parse_code_ordering(to_string(CodeOrdering::pairclone_tree)) == CodeOrdering::pairclone_tree);
  }

  TEST_CASE("bit vectors and gains") {
    CHECK(bit_vector(q(4)) == std::array<int, 4>{0, 0, 1, 1});
    CHECK(bit_vector(q(6)) == std::array<int, 4>{0, 1, 1, 0});
    CHECK(mutation_count(q(1)) == 0);
    CHECK(mutation_count(q(10)) == 4);
    // (00,00) gains one mutation: four slots onto two codes.
    CHECK(gain_multiplicity(q(1), q(2)) == 2);
    CHECK(gain_multiplicity(q(1), q(3)) == 2);
    CHECK(gain_multiplicity(q(1), q(4)) == 0);
    int total = 0;
    for (int v = 1; v <= kNumGenotypes; ++v) total += gain_multiplicity(q(6), q(v));
    CHECK(total == 2);
  }
}
