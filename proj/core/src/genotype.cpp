#include "pairclone/genotype.hpp"

#include <algorithm>
#include <stdexcept>

namespace pairclone {
namespace {

// Canonical rows (as 2-bit numbers) in PairClone order.
constexpr std::array<std::array<int, 2>, kNumGenotypes> kCanonicalRows{{
    {0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3},
}};

// Outcome alleles; -1 marks a locus the read does not cover.
constexpr std::array<std::array<int, 2>, kNumOutcomes> kOutcomeAlleles{{
    {0, 0}, {0, 1}, {1, 0}, {1, 1}, {-1, 0}, {-1, 1}, {0, -1}, {1, -1},
}};

// Tree-chapter position of each internal index (and its inverse; the swap is an involution).
constexpr std::array<int, kNumGenotypes> kTreeOrderSwap{0, 1, 2, 3, 4, 5, 7, 6, 8, 9};

int index_of_rows(int a, int b) {
  if (a > b) std::swap(a, b);
  for (int i = 0; i < kNumGenotypes; ++i) {
    if (kCanonicalRows[i][0] == a && kCanonicalRows[i][1] == b) return i;
  }
  throw std::logic_error("unreachable: rows not canonical");
}

MatchTable build_match_table() {
  MatchTable table{};
  for (int q = 0; q < kNumGenotypes; ++q) {
    const AlleleMatrix m = representative(GenotypeCode::from_index(q));
    for (int g = 1; g <= kNumOutcomes; ++g) {
      table[q][g - 1] = match_prob(ReadOutcome{g}, m);
    }
  }
  return table;
}

using GainTable = std::array<std::array<int, kNumGenotypes>, kNumGenotypes>;

GainTable build_gain_table() {
  GainTable table{};
  for (int p = 0; p < kNumGenotypes; ++p) {
    const AlleleMatrix parent = representative(GenotypeCode::from_index(p));
    for (int j = 0; j < 2; ++j) {
      for (int r = 0; r < 2; ++r) {
        if (parent.z[j][r] != 0) continue;
        AlleleMatrix child = parent;
        child.z[j][r] = 1;
        ++table[p][canonicalize(child).index()];
      }
    }
  }
  return table;
}

}  // namespace

AlleleMatrix AlleleMatrix::from_rows(int row1_bits, int row2_bits) {
  if (row1_bits < 0 || row1_bits > 3 || row2_bits < 0 || row2_bits > 3) {
    throw std::out_of_range("allele row must be a 2-bit value");
  }
  AlleleMatrix m;
  m.z[0] = {static_cast<std::uint8_t>(row1_bits >> 1), static_cast<std::uint8_t>(row1_bits & 1)};
  m.z[1] = {static_cast<std::uint8_t>(row2_bits >> 1), static_cast<std::uint8_t>(row2_bits & 1)};
  return m;
}

GenotypeCode::GenotypeCode(int q) {
  if (q < 1 || q > kNumGenotypes) {
    throw std::out_of_range("genotype code must lie in 1..10, got " + std::to_string(q));
  }
  index_ = static_cast<std::uint8_t>(q - 1);
}

std::string to_string(CodeOrdering ordering) {
  return ordering == CodeOrdering::pairclone ? "pairclone" : "pairclone_tree";
}

CodeOrdering parse_code_ordering(const std::string& name) {
  if (name == "pairclone") return CodeOrdering::pairclone;
  if (name == "pairclone_tree") return CodeOrdering::pairclone_tree;
  throw std::invalid_argument("unknown code ordering '" + name + "'");
}

ReadClass ReadOutcome::read_class() const {
  if (g <= 4) return ReadClass::complete;
  if (g <= 6) return ReadClass::left_missing;
  return ReadClass::right_missing;
}

std::string ReadOutcome::label() const {
  static const std::array<const char*, kNumOutcomes> labels{"00", "01", "10", "11",
                                                            "-0", "-1", "0-", "1-"};
  return labels.at(index());
}

GenotypeCode canonicalize(const AlleleMatrix& m) {
  return GenotypeCode::from_index(index_of_rows(m.row_bits(0), m.row_bits(1)));
}

AlleleMatrix representative(GenotypeCode q) {
  const auto& rows = kCanonicalRows.at(q.index());
  return AlleleMatrix::from_rows(rows[0], rows[1]);
}

int mutation_count(GenotypeCode q) {
  static const auto counts = [] {
    std::array<int, kNumGenotypes> c{};
    for (int i = 0; i < kNumGenotypes; ++i) {
      c[i] = representative(GenotypeCode::from_index(i)).mutation_count();
    }
    return c;
  }();
  return counts[q.index()];
}

double match_prob(ReadOutcome g, const AlleleMatrix& m) {
  const auto& h = kOutcomeAlleles.at(g.index());
  double p = 0.0;
  for (int j = 0; j < 2; ++j) {
    const bool first = h[0] < 0 || h[0] == m.z[j][0];
    const bool second = h[1] < 0 || h[1] == m.z[j][1];
    if (first && second) p += 0.5;
  }
  return p;
}

double match_prob(ReadOutcome g, GenotypeCode q) { return match_table()[q.index()][g.index()]; }

const MatchTable& match_table() {
  static const MatchTable table = build_match_table();
  return table;
}

int external_code(GenotypeCode q, CodeOrdering ordering) {
  return ordering == CodeOrdering::pairclone ? q.value() : kTreeOrderSwap[q.index()] + 1;
}

GenotypeCode from_external(int code, CodeOrdering ordering) {
  const GenotypeCode read(code);
  if (ordering == CodeOrdering::pairclone) return read;
  return GenotypeCode::from_index(kTreeOrderSwap[read.index()]);
}

std::array<int, 4> bit_vector(GenotypeCode q) {
  const AlleleMatrix m = representative(q);
  return {m.z[0][0], m.z[0][1], m.z[1][0], m.z[1][1]};
}

int gain_multiplicity(GenotypeCode parent, GenotypeCode child) {
  static const GainTable table = build_gain_table();
  return table[parent.index()][child.index()];
}

}  // namespace pairclone
