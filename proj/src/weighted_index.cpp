#include "hubforge/weighted_index.hpp"

#include <cmath>
#include <string>

#include "hubforge/error.hpp"

namespace hubforge {

namespace {

void check_weight(double w) {
  if (!(w >= 0.0) || !std::isfinite(w))
    throw Error(ErrorCode::InvalidWeight, "weight must be finite and >= 0, got " + std::to_string(w));
}

double neumaier_sum(const std::vector<double>& v) {
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    double t = sum + x;
    comp += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace

DynamicWeightedIndex::DynamicWeightedIndex(std::size_t capacity) { grow_to(capacity); }

void DynamicWeightedIndex::grow_to(std::size_t min_capacity) {
  std::size_t cap = weights_.empty() ? 16 : weights_.size();
  while (cap < min_capacity) cap *= 2;
  if (cap == weights_.size()) return;
  weights_.resize(cap, 0.0);
  top_bit_ = 1;
  while (top_bit_ * 2 <= cap) top_bit_ *= 2;
  rebuild();
}

void DynamicWeightedIndex::set_weight(std::size_t index, double w) {
  check_weight(w);
  if (index >= weights_.size()) grow_to(index + 1);
  if (index >= size_) size_ = index + 1;
  const double delta = w - weights_[index];
  weights_[index] = w;
  const std::size_t n = weights_.size();
  for (std::size_t i = index + 1; i <= n; i += i & (~i + 1)) tree_[i] += delta;
  total_ += delta;
  ++updates_since_rebuild_;
}

void DynamicWeightedIndex::rebuild() {
  const std::size_t n = weights_.size();
  tree_.assign(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    tree_[i] += weights_[i - 1];
    const std::size_t parent = i + (i & (~i + 1));
    if (parent <= n) tree_[parent] += tree_[i];
  }
  total_ = neumaier_sum(weights_);
  updates_since_rebuild_ = 0;
}

double DynamicWeightedIndex::rescan_total() const { return neumaier_sum(weights_); }

std::size_t DynamicWeightedIndex::find(double target) const {
  std::size_t pos = 0;
  double rem = target;
  const std::size_t n = weights_.size();
  for (std::size_t step = top_bit_; step > 0; step >>= 1) {
    const std::size_t next = pos + step;
    if (next <= n && tree_[next] <= rem) {
      pos = next;
      rem -= tree_[next];
    }
  }
  // Rounding can land past the last positive slot or on an empty one.
  if (pos < size_ && weights_[pos] > 0.0) return pos;
  for (std::size_t i = pos; i < size_; ++i)
    if (weights_[i] > 0.0) return i;
  for (std::size_t i = std::min(pos, size_); i-- > 0;)
    if (weights_[i] > 0.0) return i;
  throw Error(ErrorCode::EmptyStructure, "no positive weight");
}

std::size_t DynamicWeightedIndex::sample(RandomSource& rng) const {
  if (!(total_ > 0.0)) throw Error(ErrorCode::EmptyStructure, "total weight is zero");
  return find(rng.uniform() * total_);
}

void LinearScanSampler::set_weight(std::size_t index, double w) {
  check_weight(w);
  if (index >= weights_.size()) weights_.resize(index + 1, 0.0);
  total_ += w - weights_[index];
  weights_[index] = w;
}

std::size_t LinearScanSampler::find(double target) const {
  double acc = 0.0;
  std::size_t last_positive = weights_.size();
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] <= 0.0) continue;
    acc += weights_[i];
    last_positive = i;
    if (acc > target) return i;
  }
  if (last_positive == weights_.size()) throw Error(ErrorCode::EmptyStructure, "no positive weight");
  return last_positive;
}

std::size_t LinearScanSampler::sample(RandomSource& rng) const {
  if (!(total_ > 0.0)) throw Error(ErrorCode::EmptyStructure, "total weight is zero");
  return find(rng.uniform() * total_);
}

}  // namespace hubforge
