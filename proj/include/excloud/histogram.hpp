#pragma once

#include <cstdint>
#include <vector>

namespace excloud {

/// Time-weighted occupancy histogram of one queue: weights[m] is the time
/// spent with exactly m customers.
struct MarginalHistogram {
  std::int64_t queue = 1;
  std::vector<double> weights;
  double total_time = 0.0;

  void add(std::int64_t value, double dt) {
    if (dt <= 0.0) return;
    if (value >= std::int64_t(weights.size())) weights.resize(std::size_t(value) + 1, 0.0);
    weights[std::size_t(value)] += dt;
    total_time += dt;
  }

  double probability(std::int64_t value) const {
    if (total_time <= 0.0 || value < 0 || value >= std::int64_t(weights.size())) return 0.0;
    return weights[std::size_t(value)] / total_time;
  }

  void merge(const MarginalHistogram& other) {
    if (other.weights.size() > weights.size()) weights.resize(other.weights.size(), 0.0);
    for (std::size_t m = 0; m < other.weights.size(); ++m) weights[m] += other.weights[m];
    total_time += other.total_time;
  }
};

}  // namespace excloud
