#pragma once

// Independent replicates. Replicate r runs with seed stream_seed(seed, r);
// results are stored in replicate order regardless of the worker count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

#include "excloud/random.hpp"

namespace excloud {

inline std::uint64_t replicate_seed(std::uint64_t seed, std::int64_t replicate) {
  return stream_seed(seed, std::uint64_t(replicate));
}

/// Calls task(r) for r = 0..count-1 on up to `jobs` threads.
template <class Task>
auto run_replicates(std::int64_t count, unsigned jobs, Task&& task)
    -> std::vector<std::invoke_result_t<Task&, std::int64_t>> {
  using Result = std::invoke_result_t<Task&, std::int64_t>;
  std::vector<Result> results(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  jobs = std::max(1u, std::min<unsigned>(jobs, unsigned(std::max<std::int64_t>(count, 1))));
  if (jobs == 1) {
    for (std::int64_t r = 0; r < count; ++r) results[std::size_t(r)] = task(r);
    return results;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::int64_t r = next++; r < count; r = next++) {
        try {
          results[std::size_t(r)] = task(r);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace excloud
