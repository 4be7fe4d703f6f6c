#pragma once

// The customer random walk: the queue sequence visited by a single tagged
// customer. From queue i it moves to i-1 with probability b_i / mu_i and to
// i+1 with probability a_{i+1} / mu_i, where mu_i = b_i + a_{i+1}; queue 0 is
// the outside of the network and absorbs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "excloud/error.hpp"
#include "excloud/random.hpp"
#include "excloud/rates.hpp"

namespace excloud {

enum class WalkClass { transient, null_recurrent, positive_recurrent };

inline const char* to_string(WalkClass c) {
  switch (c) {
    case WalkClass::transient: return "transient";
    case WalkClass::null_recurrent: return "null_recurrent";
    case WalkClass::positive_recurrent: return "positive_recurrent";
  }
  return "?";
}

enum class WalkExactness { exact_tail, capped };

inline const char* to_string(WalkExactness e) {
  return e == WalkExactness::exact_tail ? "exact_tail" : "capped";
}

struct WalkClassification {
  WalkClass cls = WalkClass::null_recurrent;
  double p0 = 0.0;
  double p0_lower = 0.0;  // bracket, equal to p0 when exact
  double p0_upper = 0.0;
  WalkExactness exactness = WalkExactness::exact_tail;
  std::int64_t depth = 0;
};

namespace detail {

/// Ratio between consecutive terms once both indices are in the tail.
struct TailRatios {
  double escape;      // b_j / a_{j+1}
  double occupation;  // a_{j+1} / b_j
};

inline TailRatios tail_ratios(const RateEnvironment& env) {
  if (const auto* c = std::get_if<ConstantTail>(&env.tail())) return {c->b / c->a, c->a / c->b};
  const auto& f = std::get<FactorialTail>(env.tail());
  return {1.0 / f.scale, f.scale};
}

}  // namespace detail

/// Recurrence class and escape probability
///   p0 = (1 + b_1/a_2 + b_1 b_2/(a_2 a_3) + ...)^{-1}.
inline WalkClassification classify(const RateEnvironment& env, std::int64_t kmax = 1'000'000,
                                   double tol = 1e-14) {
  require_a0(env, "classify");
  WalkClassification out;
  if (env.analytic_tail()) {
    const std::int64_t P = env.prefix_length();
    const auto q = detail::tail_ratios(env);
    // escape series: t_0 = 1, t_k = prod_{j<=k} b_j / a_{j+1}; geometric with ratio q.escape from k = P
    double log_t = 0.0, head = 0.0;
    for (std::int64_t k = 1; k <= P; ++k) {
      head += std::exp(log_t);
      log_t += env.log_rate_at(k).second - env.log_rate_at(k + 1).first;
    }
    // occupation series: u_k = a_{k+1} alpha_k, geometric with ratio q.occupation from k = P
    out.depth = P;
    out.exactness = WalkExactness::exact_tail;
    if (q.escape < 1.0) {
      const double total = head + std::exp(log_t) / (1.0 - q.escape);
      out.p0 = 1.0 / total;
      out.cls = WalkClass::transient;
    } else {
      out.p0 = 0.0;
      out.cls = q.occupation < 1.0 ? WalkClass::positive_recurrent : WalkClass::null_recurrent;
    }
    out.p0_lower = out.p0_upper = out.p0;
    return out;
  }

  out.exactness = WalkExactness::capped;
  const std::int64_t limit = std::min(kmax, env.max_index() - 1);
  double log_t = 0.0, sum = 0.0, last = 0.0, prev = 0.0;
  double log_alpha = 0.0, occ = 0.0;
  bool escape_converged = false, occ_converged = false;
  std::int64_t k = 0;
  for (; k <= limit; ++k) {
    const double term = std::exp(log_t);
    sum += term;
    prev = last;
    last = term;
    const auto [la, lb] = env.log_rate_at(k + 1);
    const double u = std::exp(la + log_alpha);
    occ += u;
    if (k > 0 && term <= tol * sum) escape_converged = true;
    if (k > 0 && u <= tol * occ) occ_converged = true;
    if (escape_converged && occ_converged) break;
    if (k == limit) break;
    log_alpha += la - lb;
    log_t += lb - env.log_rate_at(k + 2).first;
  }
  out.depth = k;
  out.p0_upper = 1.0 / sum;
  if (escape_converged) {
    out.p0 = out.p0_lower = out.p0_upper;
    out.cls = WalkClass::transient;
  } else {
    double extrapolated = std::numeric_limits<double>::infinity();
    if (prev > 0.0 && last / prev < 1.0) extrapolated = sum + last * (last / prev) / (1.0 - last / prev);
    out.p0_lower = std::isfinite(extrapolated) ? 1.0 / extrapolated : 0.0;
    out.p0 = out.p0_lower;
    out.cls = occ_converged ? WalkClass::positive_recurrent : WalkClass::null_recurrent;
    if (out.p0 > 0.0) out.cls = WalkClass::transient;
  }
  return out;
}

/// Discrete-time trajectory from `start`, stopped on absorption at 0.
inline std::vector<std::int64_t> simulate_walk(const RateEnvironment& env, std::int64_t n_steps,
                                               std::int64_t start, std::uint64_t seed) {
  require_a0(env, "simulate_walk");
  if (start < 1) throw ConfigError("simulate_walk: start must be >= 1");
  if (n_steps < 0) throw ConfigError("simulate_walk: n_steps must be >= 0");
  Rng rng(seed);
  std::vector<std::int64_t> path{start};
  std::int64_t i = start;
  for (std::int64_t s = 0; s < n_steps && i > 0; ++s) {
    const double left = env.rate_at(i).b;
    const double right = env.rate_at(i + 1).a;
    i += rng.uniform() * (left + right) < left ? -1 : 1;
    path.push_back(i);
  }
  return path;
}

/// Fraction of `walkers` walks from queue 1 not absorbed within `horizon` steps.
inline double escape_fraction(const RateEnvironment& env, std::int64_t walkers,
                              std::int64_t horizon, std::uint64_t seed) {
  require_a0(env, "escape_fraction");
  Rng rng(seed);
  std::int64_t escaped = 0;
  for (std::int64_t w = 0; w < walkers; ++w) {
    std::int64_t i = 1;
    for (std::int64_t s = 0; s < horizon && i > 0; ++s) {
      const double left = env.rate_at(i).b;
      const double right = env.rate_at(i + 1).a;
      i += rng.uniform() * (left + right) < left ? -1 : 1;
    }
    if (i > 0) ++escaped;
  }
  return double(escaped) / double(walkers);
}

}  // namespace excloud
