#pragma once

// Genotype algebra for a mutation pair: the 10 mirror-collapsed 2x2 allele
// matrices, the 8 possible read outcomes, and the read-matching probability.

#include <array>
#include <compare>
#include <cstdint>
#include <string>

namespace pairclone {

inline constexpr int kNumGenotypes = 10;
inline constexpr int kNumOutcomes = 8;

// z[j][r]: allele j (homologous chromosome), locus r; 1 = somatic mutation.
struct AlleleMatrix {
  std::array<std::array<std::uint8_t, 2>, 2> z{};

  friend bool operator==(const AlleleMatrix&, const AlleleMatrix&) = default;

  // Row j read as a 2-bit number (locus 1 is the high bit).
  [[nodiscard]] constexpr int row_bits(int j) const { return 2 * z[j][0] + z[j][1]; }
  [[nodiscard]] AlleleMatrix mirrored() const { return AlleleMatrix{{z[1], z[0]}}; }
  [[nodiscard]] int mutation_count() const { return z[0][0] + z[0][1] + z[1][0] + z[1][1]; }

  static AlleleMatrix from_rows(int row1_bits, int row2_bits);
};

// A canonical genotype, numbered 1..10 in the PairClone list order
// (00,00) (00,01) (00,10) (00,11) (01,01) (01,10) (01,11) (10,10) (10,11) (11,11).
// The numbering used on disk may differ; see CodeOrdering.
class GenotypeCode {
 public:
  constexpr GenotypeCode() = default;
  explicit GenotypeCode(int q);

  static constexpr GenotypeCode from_index(int index) {
    GenotypeCode code;
    code.index_ = static_cast<std::uint8_t>(index);
    return code;
  }

  [[nodiscard]] constexpr int value() const { return index_ + 1; }
  [[nodiscard]] constexpr int index() const { return index_; }

  friend constexpr auto operator<=>(GenotypeCode, GenotypeCode) = default;

 private:
  std::uint8_t index_ = 0;
};

inline constexpr GenotypeCode kReferenceGenotype = GenotypeCode::from_index(0);

// The two code lists in use. Both enumerate the same ten canonical matrices and
// differ only in positions 7 and 8.
enum class CodeOrdering {
  pairclone,       // 7 = (01,11), 8 = (10,10)
  pairclone_tree,  // 7 = (10,10), 8 = (01,11)
};

std::string to_string(CodeOrdering ordering);
CodeOrdering parse_code_ordering(const std::string& name);

// Read outcome h_g, g = 1..8: 00, 01, 10, 11, -0, -1, 0-, 1-.
enum class ReadClass { complete, left_missing, right_missing };

struct ReadOutcome {
  int g;  // 1..8

  [[nodiscard]] constexpr int index() const { return g - 1; }
  [[nodiscard]] ReadClass read_class() const;
  [[nodiscard]] std::string label() const;
};

[[nodiscard]] GenotypeCode canonicalize(const AlleleMatrix& m);
[[nodiscard]] AlleleMatrix representative(GenotypeCode q);
[[nodiscard]] int mutation_count(GenotypeCode q);

// A(h_g, z^(q)) in {0, 0.5, 1}.
[[nodiscard]] double match_prob(ReadOutcome g, GenotypeCode q);
[[nodiscard]] double match_prob(ReadOutcome g, const AlleleMatrix& m);

// Dense table A[q.index()][g.index()].
using MatchTable = std::array<std::array<double, kNumOutcomes>, kNumGenotypes>;
[[nodiscard]] const MatchTable& match_table();

// Integer written to / read from files under a given ordering.
[[nodiscard]] int external_code(GenotypeCode q, CodeOrdering ordering);
[[nodiscard]] GenotypeCode from_external(int code, CodeOrdering ordering);

// Four-bit vectorisation (z_11, z_12, z_21, z_22) of the canonical representative.
[[nodiscard]] std::array<int, 4> bit_vector(GenotypeCode q);

// Number of unmutated (allele, locus) slots of q whose flip yields `child`.
// Zero unless mutation_count(child) == mutation_count(q) + 1.
[[nodiscard]] int gain_multiplicity(GenotypeCode parent, GenotypeCode child);

}  // namespace pairclone
