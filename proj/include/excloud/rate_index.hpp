#pragma once

// Cumulative-weight index over queue slots 1..capacity (Fenwick tree) for
// O(log n) categorical selection proportional to stored weights.

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

namespace excloud {

class RateIndex {
 public:
  explicit RateIndex(std::int64_t capacity = 64) { reset(capacity); }

  std::int64_t capacity() const { return capacity_; }
  double total() const { return total_; }
  double weight(std::int64_t k) const { return k <= capacity_ ? weights_[std::size_t(k)] : 0.0; }

  void set(std::int64_t k, double w) {
    if (k > capacity_) grow(k);
    const double delta = w - weights_[std::size_t(k)];
    if (delta == 0.0) return;
    weights_[std::size_t(k)] = w;
    for (std::int64_t i = k; i <= capacity_; i += i & -i) tree_[std::size_t(i)] += delta;
    total_ += delta;
    if (++updates_ >= kRebuildEvery) rebuild();
  }

  /// Slot k with prefix(k-1) <= u < prefix(k), and the residual u - prefix(k-1).
  /// u must lie in [0, total()). Rounding can land on a zero-weight slot; callers
  /// treat such a draw as a rejected (null) event.
  std::pair<std::int64_t, double> find(double u) const {
    std::int64_t pos = 0;
    for (std::int64_t step = capacity_; step > 0; step >>= 1) {
      const std::int64_t next = pos + step;
      if (next <= capacity_ && tree_[std::size_t(next)] <= u) {
        pos = next;
        u -= tree_[std::size_t(next)];
      }
    }
    return {std::min(pos + 1, capacity_), u};
  }

  void rebuild() {
    tree_.assign(std::size_t(capacity_) + 1, 0.0);
    total_ = 0.0;
    for (std::int64_t i = 1; i <= capacity_; ++i) {
      tree_[std::size_t(i)] += weights_[std::size_t(i)];
      total_ += weights_[std::size_t(i)];
      const std::int64_t parent = i + (i & -i);
      if (parent <= capacity_) tree_[std::size_t(parent)] += tree_[std::size_t(i)];
    }
    updates_ = 0;
  }

  void reset(std::int64_t capacity) {
    capacity_ = 1;
    while (capacity_ < capacity) capacity_ <<= 1;
    weights_.assign(std::size_t(capacity_) + 1, 0.0);
    tree_.assign(std::size_t(capacity_) + 1, 0.0);
    total_ = 0.0;
    updates_ = 0;
  }

 private:
  static constexpr std::int64_t kRebuildEvery = std::int64_t(1) << 22;

  void grow(std::int64_t k) {
    std::int64_t cap = capacity_;
    while (cap < k) cap <<= 1;
    weights_.resize(std::size_t(cap) + 1, 0.0);
    capacity_ = cap;
    rebuild();
  }

  std::int64_t capacity_ = 1;
  std::vector<double> weights_;
  std::vector<double> tree_;
  double total_ = 0.0;
  std::int64_t updates_ = 0;
};

}  // namespace excloud
