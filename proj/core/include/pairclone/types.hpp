#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pairclone/genotype.hpp"

namespace pairclone {

using NoiseVector = std::array<double, kNumOutcomes>;

// K x C matrix of genotype codes (row = mutation pair, column = subclone).
class GenotypeMatrix {
 public:
  GenotypeMatrix() = default;
  GenotypeMatrix(int pairs, int subclones, GenotypeCode fill = kReferenceGenotype)
      : pairs_(pairs),
        subclones_(subclones),
        codes_(static_cast<std::size_t>(pairs) * subclones,
               static_cast<std::uint8_t>(fill.index())) {
    if (pairs < 0 || subclones < 0) throw std::invalid_argument("negative matrix dimension");
  }

  [[nodiscard]] int pairs() const { return pairs_; }
  [[nodiscard]] int subclones() const { return subclones_; }

  [[nodiscard]] GenotypeCode operator()(int k, int c) const {
    return GenotypeCode::from_index(codes_[offset(k, c)]);
  }
  [[nodiscard]] int index(int k, int c) const { return codes_[offset(k, c)]; }
  void set(int k, int c, GenotypeCode q) { codes_[offset(k, c)] = static_cast<std::uint8_t>(q.index()); }

  [[nodiscard]] std::span<const std::uint8_t> row(int k) const {
    return {codes_.data() + offset(k, 0), static_cast<std::size_t>(subclones_)};
  }

  // New matrix whose column c is column order[c] of this one.
  [[nodiscard]] GenotypeMatrix permute_columns(std::span<const int> order) const;

  friend bool operator==(const GenotypeMatrix&, const GenotypeMatrix&) = default;

 private:
  [[nodiscard]] std::size_t offset(int k, int c) const {
    return static_cast<std::size_t>(k) * subclones_ + c;
  }

  int pairs_ = 0;
  int subclones_ = 0;
  std::vector<std::uint8_t> codes_;
};

// Row-major real matrix; used for weights (T x J) and similar small tables.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  [[nodiscard]] double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  [[nodiscard]] std::span<double> row(int r) {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }
  [[nodiscard]] std::span<const double> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }
  [[nodiscard]] const std::vector<double>& data() const { return data_; }
  [[nodiscard]] std::vector<double>& data() { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Observed read counts n[t][k][g]. Entries are real so that fractional
// training/test splits stay in the same type.
class ReadCounts {
 public:
  ReadCounts() = default;
  ReadCounts(int samples, int pairs)
      : samples_(samples),
        pairs_(pairs),
        n_(static_cast<std::size_t>(samples) * pairs * kNumOutcomes, 0.0) {}

  [[nodiscard]] int samples() const { return samples_; }
  [[nodiscard]] int pairs() const { return pairs_; }

  [[nodiscard]] double& operator()(int t, int k, int g) { return n_[offset(t, k) + g]; }
  [[nodiscard]] double operator()(int t, int k, int g) const { return n_[offset(t, k) + g]; }

  [[nodiscard]] std::span<double, kNumOutcomes> cell(int t, int k) {
    return std::span<double, kNumOutcomes>(n_.data() + offset(t, k), kNumOutcomes);
  }
  [[nodiscard]] std::span<const double, kNumOutcomes> cell(int t, int k) const {
    return std::span<const double, kNumOutcomes>(n_.data() + offset(t, k), kNumOutcomes);
  }

  [[nodiscard]] double total(int t, int k) const;
  [[nodiscard]] double grand_total() const;
  [[nodiscard]] const std::vector<double>& data() const { return n_; }
  [[nodiscard]] std::vector<double>& data() { return n_; }

  [[nodiscard]] ReadCounts scaled(double factor) const;

  friend bool operator==(const ReadCounts&, const ReadCounts&) = default;

 private:
  [[nodiscard]] std::size_t offset(int t, int k) const {
    return (static_cast<std::size_t>(t) * pairs_ + k) * kNumOutcomes;
  }

  int samples_ = 0;
  int pairs_ = 0;
  std::vector<double> n_;
};

// Conditional outcome probabilities p~[t][k][g].
using ProbTable = ReadCounts;

}  // namespace pairclone
