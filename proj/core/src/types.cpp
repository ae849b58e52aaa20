#include "pairclone/types.hpp"

#include <numeric>

namespace pairclone {

GenotypeMatrix GenotypeMatrix::permute_columns(std::span<const int> order) const {
  if (static_cast<int>(order.size()) != subclones_) {
    throw std::invalid_argument("column permutation has wrong length");
  }
  GenotypeMatrix out(pairs_, subclones_);
  for (int k = 0; k < pairs_; ++k) {
    for (int c = 0; c < subclones_; ++c) out.set(k, c, (*this)(k, order[c]));
  }
  return out;
}

double ReadCounts::total(int t, int k) const {
  const auto n = cell(t, k);
  return std::accumulate(n.begin(), n.end(), 0.0);
}

double ReadCounts::grand_total() const { return std::accumulate(n_.begin(), n_.end(), 0.0); }

ReadCounts ReadCounts::scaled(double factor) const {
  ReadCounts out = *this;
  for (double& x : out.n_) x *= factor;
  return out;
}

}  // namespace pairclone
