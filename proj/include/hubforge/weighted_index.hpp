#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hubforge/rng.hpp"

namespace hubforge {

/// Mutable positive weights with O(log n) update and proportional sampling.
///
/// Binary-indexed prefix sums over slots; capacity grows by doubling on demand.
/// `total()` is cached and re-synchronised by `rebuild()`.
class DynamicWeightedIndex {
 public:
  DynamicWeightedIndex() = default;
  explicit DynamicWeightedIndex(std::size_t capacity);

  /// Grows the structure when index >= size(). Throws InvalidWeight for
  /// negative, NaN or infinite w.
  void set_weight(std::size_t index, double w);

  double weight(std::size_t index) const { return index < weights_.size() ? weights_[index] : 0.0; }
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return weights_.size(); }
  double total() const { return total_; }

  /// First slot whose cumulative weight strictly exceeds u * total(), u uniform.
  /// Throws EmptyStructure when total() == 0.
  std::size_t sample(RandomSource& rng) const;

  /// Descent for a given point in [0, total()).
  std::size_t find(double target) const;

  /// Recomputes prefix sums and the cached total from the stored weights.
  void rebuild();

  /// Linear rescan of the stored weights (Neumaier-compensated).
  double rescan_total() const;

  std::uint64_t updates_since_rebuild() const { return updates_since_rebuild_; }

 private:
  void grow_to(std::size_t min_capacity);

  std::vector<double> weights_;
  std::vector<double> tree_;  // 1-based Fenwick array, tree_[0] unused
  std::size_t size_ = 0;      // one past the highest slot ever written
  std::size_t top_bit_ = 0;   // largest power of two <= capacity
  double total_ = 0.0;
  std::uint64_t updates_since_rebuild_ = 0;
};

/// Serial O(n) reference with the same sampling rule. Kept for tests and the benchmark.
class LinearScanSampler {
 public:
  void set_weight(std::size_t index, double w);
  double total() const { return total_; }
  std::size_t size() const { return weights_.size(); }
  std::size_t sample(RandomSource& rng) const;
  std::size_t find(double target) const;

 private:
  std::vector<double> weights_;
  double total_ = 0.0;
};

}  // namespace hubforge
