#pragma once

// Graphical construction. Every queue carries two Poisson arrow streams:
// right arrows at rate a_{k+1} and left arrows at rate b_k. An arrow moves one
// customer in its direction if the queue is non-empty and is a no-op
// otherwise; queue 0's right arrows are the outside arrivals at queue 1.
// Systems driven by the same field are coupled.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "excloud/engine.hpp"
#include "excloud/error.hpp"
#include "excloud/random.hpp"
#include "excloud/rates.hpp"

namespace excloud {

enum class ArrowDir : std::uint8_t { left, right };

struct Arrow {
  double time = 0.0;
  std::int64_t queue = 0;
  ArrowDir dir = ArrowDir::right;
};

/// Arrow streams on [0, window] for right arrows at queues 0..cap and left
/// arrows at queues 1..cap+1, merged in time order.
struct PoissonField {
  double window = 0.0;
  std::int64_t cap = 0;
  std::uint64_t seed = 0;
  std::vector<Arrow> arrows;

  std::int64_t count(std::int64_t queue, ArrowDir dir) const {
    return std::count_if(arrows.begin(), arrows.end(),
                         [&](const Arrow& a) { return a.queue == queue && a.dir == dir; });
  }
};

/// Stream id of the (queue, direction) stream; also its seed index.
inline std::uint64_t arrow_stream_id(std::int64_t queue, ArrowDir dir) {
  return 2 * std::uint64_t(queue) + (dir == ArrowDir::left ? 1 : 0);
}

inline PoissonField build_field(const RateEnvironment& env, double window, std::int64_t cap,
                                std::uint64_t seed) {
  if (!(window >= 0.0)) throw ConfigError("build_field: window must be >= 0");
  if (cap < 1) throw ConfigError("build_field: cap must be >= 1");
  if (cap + 2 > env.max_index()) throw IndexError("build_field: rates needed up to index cap+2");
  PoissonField field;
  field.window = window;
  field.cap = cap;
  field.seed = seed;
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t base = attempt == 0 ? seed : stream_seed(seed, ~attempt);
    field.arrows.clear();
    auto emit = [&](std::int64_t queue, ArrowDir dir, double rate) {
      if (!(rate > 0.0)) return;
      Rng rng(base, arrow_stream_id(queue, dir));
      for (double t = rng.exponential(rate); t <= window; t += rng.exponential(rate))
        field.arrows.push_back({t, queue, dir});
    };
    for (std::int64_t k = 0; k <= cap; ++k) emit(k, ArrowDir::right, env.rate_at(k + 1).a);
    for (std::int64_t k = 1; k <= cap + 1; ++k) emit(k, ArrowDir::left, env.rate_at(k).b);
    std::sort(field.arrows.begin(), field.arrows.end(),
              [](const Arrow& x, const Arrow& y) { return x.time < y.time; });
    const bool tie = std::adjacent_find(field.arrows.begin(), field.arrows.end(),
                                        [](const Arrow& x, const Arrow& y) {
                                          return x.time == y.time;
                                        }) != field.arrows.end();
    if (!tie) return field;
  }
}

enum class FieldBoundary { semi_infinite, lower_truncated, upper_truncated };

inline const char* to_string(FieldBoundary b) {
  switch (b) {
    case FieldBoundary::semi_infinite: return "semi_infinite";
    case FieldBoundary::lower_truncated: return "lower_truncated";
    case FieldBoundary::upper_truncated: return "upper_truncated";
  }
  return "?";
}

struct Truncation {
  FieldBoundary boundary = FieldBoundary::semi_infinite;
  std::int64_t queues = 0;  // N for the truncated variants
};

/// Applies one arrow. Returns false when the arrow is a no-op for this system.
/// Semi-infinite systems abort when a customer would leave the field's cap.
inline bool apply_arrow(GapState& s, const Arrow& arrow, const Truncation& trunc, std::int64_t cap) {
  const std::int64_t k = arrow.queue;
  const bool truncated = trunc.boundary != FieldBoundary::semi_infinite;
  const std::int64_t N = trunc.queues;
  s.clock = arrow.time;
  if (arrow.dir == ArrowDir::right) {
    if (k == 0) {
      s.add(1, +1);
      s.x1 -= 1;
      s.entered += 1;
      return true;
    }
    if (truncated && k > N) return false;
    if (s.gap(k) == 0) return false;
    s.add(k, -1);
    if (truncated && k == N) {
      s.exited_right += 1;
    } else {
      if (k + 1 > cap)
        throw SimulationAbort("coupling: a customer reached the field cap " + std::to_string(cap));
      s.add(k + 1, +1);
    }
    return true;
  }
  if (truncated && k == N + 1) {
    if (trunc.boundary != FieldBoundary::upper_truncated) return false;
    s.add(N, +1);
    s.injected_right += 1;
    return true;
  }
  if (truncated && k > N) return false;
  if (s.gap(k) == 0) return false;
  s.add(k, -1);
  if (k == 1) {
    s.x1 += 1;
    s.exited += 1;
  } else {
    s.add(k - 1, +1);
  }
  return true;
}

inline GapState restrict_to(const GapState& s, std::int64_t N) {
  GapState out;
  out.x1 = s.x1;
  out.clock = s.clock;
  for (std::int64_t k = 1; k <= std::min(N, s.frontier); ++k)
    if (s.gap(k) > 0) out.add(k, s.gap(k));
  return out;
}

/// Runs one system through the whole field. `observer(arrow_index, arrow, state)`
/// sees the state after every arrow.
template <class Observer>
GapState apply_field(const GapState& initial, const PoissonField& field, const Truncation& trunc,
                     Observer&& observer) {
  if (trunc.boundary != FieldBoundary::semi_infinite) {
    if (trunc.queues < 1 || trunc.queues >= field.cap)
      throw ConfigError("apply_field: truncation N must satisfy 1 <= N < cap");
    if (initial.frontier > trunc.queues)
      throw ConfigError("apply_field: initial state occupies queues beyond N");
  }
  GapState s = initial;
  for (std::size_t i = 0; i < field.arrows.size(); ++i) {
    apply_arrow(s, field.arrows[i], trunc, field.cap);
    observer(i, field.arrows[i], s);
  }
  s.clock = field.window;
  return s;
}

inline GapState apply_field(const GapState& initial, const PoissonField& field, const Truncation& trunc) {
  return apply_field(initial, field, trunc, [](std::size_t, const Arrow&, const GapState&) {});
}

struct OrderingViolation {
  std::size_t arrow = 0;
  double time = 0.0;
  std::int64_t queue = 0;  // 0: the X_1 ordering
  std::string what;
};

struct SandwichPoint {
  double time = 0.0;
  std::int64_t x1_lower = 0, x1 = 0, x1_upper = 0;
  std::int64_t total_lower = 0, total = 0, total_upper = 0;
};

struct SandwichReport {
  std::int64_t N = 0;
  std::size_t arrows = 0;
  std::size_t checks = 0;
  std::vector<OrderingViolation> violations;
  std::vector<SandwichPoint> trajectory;  // every `record_every`-th arrow
  GapState lower, system, upper;
};

namespace detail {

inline void check_sandwich(const GapState& lo, const GapState& mid, const GapState& up, std::int64_t N,
                           std::int64_t k, std::size_t i, double t, SandwichReport& rep) {
  if (k < 1 || k > N) return;
  ++rep.checks;
  if (lo.gap(k) > mid.gap(k)) rep.violations.push_back({i, t, k, "lower exceeds system"});
  if (mid.gap(k) > up.gap(k)) rep.violations.push_back({i, t, k, "system exceeds upper"});
}

}  // namespace detail

/// Lower truncation, semi-infinite system and upper truncation under one field,
/// with the orderings checked after every arrow.
inline SandwichReport sandwich_run(const GapState& initial, const PoissonField& field, std::int64_t N,
                                   std::size_t record_every = 0) {
  if (N < 1 || N + 1 >= field.cap) throw ConfigError("sandwich_run: need 1 <= N and N + 1 < cap");
  SandwichReport rep;
  rep.N = N;
  GapState lo = restrict_to(initial, N), mid = initial, up = restrict_to(initial, N);
  const Truncation tlo{FieldBoundary::lower_truncated, N}, tmid{}, tup{FieldBoundary::upper_truncated, N};
  auto full_check = [&](std::size_t i, double t) {
    for (std::int64_t k = 1; k <= N; ++k) detail::check_sandwich(lo, mid, up, N, k, i, t, rep);
  };
  full_check(0, 0.0);
  for (std::size_t i = 0; i < field.arrows.size(); ++i) {
    const Arrow& a = field.arrows[i];
    apply_arrow(lo, a, tlo, field.cap);
    apply_arrow(mid, a, tmid, field.cap);
    apply_arrow(up, a, tup, field.cap);
    const std::int64_t k = a.queue == N + 1 ? N : a.queue;
    for (std::int64_t j = k - 1; j <= k + 1; ++j) detail::check_sandwich(lo, mid, up, N, j, i, a.time, rep);
    if (!(lo.x1 <= mid.x1 && mid.x1 <= up.x1)) rep.violations.push_back({i, a.time, 0, "X1 ordering"});
    if (record_every > 0 && i % record_every == 0)
      rep.trajectory.push_back({a.time, lo.x1, mid.x1, up.x1, lo.total_customers, mid.total_customers,
                                up.total_customers});
  }
  full_check(field.arrows.size(), field.window);
  rep.arrows = field.arrows.size();
  rep.lower = lo;
  rep.system = mid;
  rep.upper = up;
  return rep;
}

/// Upper system with customers split into first class (the lower system)
/// and second class (the surplus).
struct TwoClassState {
  GapState first;
  GapState second;

  std::int64_t combined(std::int64_t k) const { return first.gap(k) + second.gap(k); }
};

struct TwoClassReport {
  std::size_t arrows = 0;
  std::vector<OrderingViolation> violations;
  std::size_t projection_mismatches = 0;  // class-blind state != single-system upper state
  std::size_t first_class_mismatches = 0; // first-class state != single-system lower state
  TwoClassState final_state;
};

/// One arrow under the priority rule: a served queue releases a first-class
/// customer whenever it holds one. Arrivals are first class.
inline void apply_two_class_arrow(TwoClassState& s, const Arrow& arrow, std::int64_t cap) {
  const std::int64_t k = arrow.queue;
  s.first.clock = s.second.clock = arrow.time;
  if (arrow.dir == ArrowDir::right && k == 0) {
    s.first.add(1, +1);
    s.first.x1 -= 1;
    s.first.entered += 1;
    s.second.x1 -= 1;
    return;
  }
  GapState* cls = s.first.gap(k) > 0 ? &s.first : (s.second.gap(k) > 0 ? &s.second : nullptr);
  if (cls == nullptr) return;
  cls->add(k, -1);
  if (arrow.dir == ArrowDir::right) {
    if (k + 1 > cap) throw SimulationAbort("two-class run: a customer reached the field cap");
    cls->add(k + 1, +1);
  } else if (k == 1) {
    // X_1 of the combined system moves with every departure, X_1 of the
    // first-class system only with first-class departures
    if (cls == &s.first) {
      s.first.x1 += 1;
      s.first.exited += 1;
    }
    s.second.x1 += 1;
  } else {
    cls->add(k - 1, +1);
  }
}

/// Two-class coupling of `lower` <= `upper`. `second.x1` tracks X_1 of the
/// combined (upper) system.
inline TwoClassReport two_class_run(const GapState& lower, const GapState& upper, const PoissonField& field) {
  const std::int64_t top = std::max(lower.frontier, upper.frontier);
  for (std::int64_t k = 1; k <= top; ++k)
    if (lower.gap(k) > upper.gap(k))
      throw ConfigError("two_class_run: lower initial state must be dominated by upper componentwise");
  TwoClassState s;
  s.first = lower;
  s.second.x1 = upper.x1;
  for (std::int64_t k = 1; k <= top; ++k)
    if (upper.gap(k) > lower.gap(k)) s.second.add(k, upper.gap(k) - lower.gap(k));

  GapState ref_lo = lower, ref_up = upper;
  const Truncation semi{};
  TwoClassReport rep;
  for (std::size_t i = 0; i < field.arrows.size(); ++i) {
    const Arrow& a = field.arrows[i];
    apply_two_class_arrow(s, a, field.cap);
    apply_arrow(ref_lo, a, semi, field.cap);
    apply_arrow(ref_up, a, semi, field.cap);
    for (std::int64_t j = std::max<std::int64_t>(1, a.queue - 1); j <= a.queue + 1; ++j) {
      if (s.first.gap(j) > s.combined(j)) rep.violations.push_back({i, a.time, j, "first class exceeds total"});
      if (s.combined(j) != ref_up.gap(j)) ++rep.projection_mismatches;
      if (s.first.gap(j) != ref_lo.gap(j)) ++rep.first_class_mismatches;
    }
    if (s.second.x1 != ref_up.x1) ++rep.projection_mismatches;
    if (s.first.x1 != ref_lo.x1) ++rep.first_class_mismatches;
    if (s.first.x1 - lower.x1 > s.second.x1 - upper.x1)
      rep.violations.push_back({i, a.time, 0, "X1 displacement ordering"});
  }
  const std::int64_t end = std::max({s.first.frontier, s.second.frontier, ref_up.frontier, ref_lo.frontier});
  for (std::int64_t j = 1; j <= end; ++j) {
    if (s.combined(j) != ref_up.gap(j)) ++rep.projection_mismatches;
    if (s.first.gap(j) != ref_lo.gap(j)) ++rep.first_class_mismatches;
  }
  rep.arrows = field.arrows.size();
  rep.final_state = s;
  return rep;
}

}  // namespace excloud
