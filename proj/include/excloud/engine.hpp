#pragma once

// Event-driven simulation of the gap process. Queue k holds the holes between
// particles k and k+1; a customer at queue k is served at rate b_k + a_{k+1}
// and moves to k-1 (rate b_k) or k+1 (rate a_{k+1}). Queue 1 receives
// outside arrivals at rate a_1, and a customer leaving queue 1 to the left
// departs the network. X_1 steps -1 on every arrival and +1 on every departure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "excloud/error.hpp"
#include "excloud/histogram.hpp"
#include "excloud/random.hpp"
#include "excloud/rate_index.hpp"
#include "excloud/rates.hpp"
#include "excloud/traffic.hpp"

namespace excloud {

struct GapState {
  std::int64_t x1 = 0;
  std::vector<std::int64_t> eta = std::vector<std::int64_t>(1, 0);  // eta[k], k >= 1
  std::int64_t frontier = 0;  // largest occupied queue, 0 when empty
  std::int64_t total_customers = 0;
  std::int64_t entered = 0;         // arrivals at queue 1
  std::int64_t exited = 0;          // departures from queue 1 to the left
  std::int64_t injected_right = 0;  // finite systems: arrivals at the last queue
  std::int64_t exited_right = 0;    // finite systems: exits from the last queue
  double clock = 0.0;

  std::int64_t gap(std::int64_t k) const {
    return k >= 1 && k < std::int64_t(eta.size()) ? eta[std::size_t(k)] : 0;
  }

  std::map<std::int64_t, std::int64_t> occupied() const {
    std::map<std::int64_t, std::int64_t> out;
    for (std::int64_t k = 1; k <= frontier; ++k)
      if (eta[std::size_t(k)] > 0) out.emplace(k, eta[std::size_t(k)]);
    return out;
  }

  void add(std::int64_t k, std::int64_t n) {
    if (k >= std::int64_t(eta.size())) {
      std::size_t size = std::max<std::size_t>(eta.size(), 16);
      while (std::int64_t(size) <= k) size *= 2;
      eta.resize(size, 0);
    }
    eta[std::size_t(k)] += n;
    total_customers += n;
    if (n > 0) {
      frontier = std::max(frontier, k);
    } else {
      while (frontier > 0 && eta[std::size_t(frontier)] == 0) --frontier;
    }
  }

  static GapState from_gaps(const std::map<std::int64_t, std::int64_t>& gaps, std::int64_t x1 = 0) {
    GapState s;
    s.x1 = x1;
    for (const auto& [k, n] : gaps) {
      if (k < 1) throw ConfigError("gap index must be >= 1");
      if (n < 0) throw ConfigError("gap counts must be non-negative");
      if (n > 0) s.add(k, n);
    }
    return s;
  }
};

/// Positions X_1..X_n: X_k = x1 + (k-1) + sum_{j<k} eta_j.
inline std::vector<std::int64_t> particle_positions(const GapState& s, std::int64_t n) {
  if (n < 1) throw ConfigError("particle_positions: n must be >= 1");
  std::vector<std::int64_t> out(static_cast<std::size_t>(n));
  std::int64_t x = s.x1;
  for (std::int64_t k = 1; k <= n; ++k) {
    out[std::size_t(k - 1)] = x;
    x += 1 + s.gap(k);
  }
  return out;
}

/// Finite systems of N+1 particles (N queues). `lower` removes right-side
/// injections (b_{N+1} = 0); `closed` keeps them.
enum class FiniteBoundary { lower, closed };

struct FiniteSystem {
  std::int64_t queues = 1;
  FiniteBoundary boundary = FiniteBoundary::closed;
};

struct Heaviside {};
struct ExplicitGaps {
  std::map<std::int64_t, std::int64_t> gaps;
  std::int64_t x1 = 0;
};
/// Independent Geo(1 - rho_k) gaps for k <= n_trunc, empty beyond. An empty
/// rho list selects the minimal admissible solution.
struct ProductGeometric {
  std::vector<double> rho;
  std::int64_t n_trunc = 0;
};
using InitialCondition = std::variant<Heaviside, ExplicitGaps, ProductGeometric>;

enum class EventKind { none, arrival, departure, move_left, move_right, injection, exit_right };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::none: return "none";
    case EventKind::arrival: return "arrival";
    case EventKind::departure: return "departure";
    case EventKind::move_left: return "move_left";
    case EventKind::move_right: return "move_right";
    case EventKind::injection: return "injection";
    case EventKind::exit_right: return "exit_right";
  }
  return "?";
}

struct EventRecord {
  double time_delta = 0.0;
  EventKind kind = EventKind::none;
  std::int64_t queue = 0;  // queue the customer left (arrival/injection: queue entered)
};

struct EventCounts {
  std::int64_t arrivals = 0;
  std::int64_t departures = 0;
  std::int64_t moves_left = 0;
  std::int64_t moves_right = 0;
  std::int64_t injections = 0;
  std::int64_t exits_right = 0;
  std::int64_t null_events = 0;

  std::int64_t total() const {
    return arrivals + departures + moves_left + moves_right + injections + exits_right;
  }
  void count(EventKind k) {
    switch (k) {
      case EventKind::none: ++null_events; break;
      case EventKind::arrival: ++arrivals; break;
      case EventKind::departure: ++departures; break;
      case EventKind::move_left: ++moves_left; break;
      case EventKind::move_right: ++moves_right; break;
      case EventKind::injection: ++injections; break;
      case EventKind::exit_right: ++exits_right; break;
    }
  }
};

inline constexpr std::int64_t kDefaultFrontierCap = std::int64_t(1) << 26;

class Simulator {
 public:
  Simulator(RateEnvironment env, GapState initial, std::uint64_t seed,
            std::optional<FiniteSystem> finite = std::nullopt, std::int64_t frontier_cap = 0)
      : env_(std::move(env)), state_(std::move(initial)), rng_(seed, 0), finite_(finite) {
    if (finite_) {
      if (finite_->queues < 1) throw ConfigError("finite system needs at least one queue");
      if (finite_->queues + 1 > env_.max_index())
        throw IndexError("finite system with N queues needs rates up to index N+1");
      for (std::int64_t k = 1; k <= finite_->queues + 1; ++k) {
        const auto r = env_.rate_at(k);
        if (!(r.a > 0.0)) throw HypothesisError("finite system: a_k must be positive for k <= N+1");
      }
      if (state_.frontier > finite_->queues)
        throw ConfigError("initial state occupies queues beyond the finite system");
      frontier_cap_ = finite_->queues;
    } else {
      const auto flags = check_hypotheses(env_);
      if (flags.a0 == Verdict::fails) throw HypothesisError("engine: positivity of all rates (A0) fails");
      if (!env_.has_tail()) throw ConfigError("engine: semi-infinite system needs a rate tail");
      if (flags.a1 == Verdict::fails && frontier_cap <= 0)
        throw HypothesisError("engine: sum 1/a_k converges (A1 fails); set an explicit frontier cap");
      frontier_cap_ = frontier_cap > 0 ? frontier_cap : kDefaultFrontierCap;
      if (state_.frontier > frontier_cap_) throw ConfigError("initial state exceeds the frontier cap");
    }
    arrival_rate_ = env_.rate_at(1).a;
    if (finite_ && finite_->boundary == FiniteBoundary::closed)
      injection_rate_ = env_.rate_at(finite_->queues + 1).b;
    index_.reset(std::max<std::int64_t>(64, state_.frontier + 1));
    ensure_rates(std::max<std::int64_t>(64, state_.frontier + 1));
    for (std::int64_t k = 1; k <= state_.frontier; ++k)
      if (state_.gap(k) > 0) index_.set(k, service_rate(k));
  }

  const GapState& state() const { return state_; }
  const RateEnvironment& env() const { return env_; }
  const EventCounts& counts() const { return counts_; }
  double total_rate() const { return arrival_rate_ + injection_rate_ + index_.total(); }

  /// Time-weighted occupancy histograms of queues 1..window from time `from`.
  void track_histograms(std::int64_t window, double from) {
    if (finite_) window = std::min(window, finite_->queues);
    hist_from_ = from;
    hists_.assign(std::size_t(window), MarginalHistogram{});
    last_touch_.assign(std::size_t(window), state_.clock);
    for (std::int64_t k = 1; k <= window; ++k) hists_[std::size_t(k - 1)].queue = k;
  }

  /// Closes the open holding intervals at the current clock and returns the histograms.
  const std::vector<MarginalHistogram>& histograms() {
    for (std::int64_t k = 1; k <= std::int64_t(hists_.size()); ++k) touch(k);
    return hists_;
  }

  /// One event with an unbounded clock.
  EventRecord step() {
    EventRecord rec;
    rec.time_delta = rng_.exponential(total_rate());
    state_.clock += rec.time_delta;
    fire(rec);
    return rec;
  }

  /// Advances to time t; the first exponential clock that would ring after t is
  /// discarded, which leaves the law unchanged by memorylessness.
  template <class Observer>
  void run_until(double t, Observer&& observer) {
    while (true) {
      const double dt = rng_.exponential(total_rate());
      if (state_.clock + dt > t) {
        state_.clock = std::max(state_.clock, t);
        return;
      }
      state_.clock += dt;
      EventRecord rec;
      rec.time_delta = dt;
      fire(rec);
      observer(rec, state_);
    }
  }

  void run_until(double t) {
    run_until(t, [](const EventRecord&, const GapState&) {});
  }

 private:
  void ensure_rates(std::int64_t k) {
    if (k + 1 < std::int64_t(a_.size())) return;
    std::size_t size = std::max<std::size_t>(a_.size(), 64);
    while (std::int64_t(size) <= k + 1) size *= 2;
    const std::size_t old = a_.size();
    a_.resize(size, 0.0);
    b_.resize(size, 0.0);
    const std::int64_t top = std::min<std::int64_t>(std::int64_t(size) - 1, env_.max_index());
    for (std::int64_t i = std::max<std::int64_t>(1, std::int64_t(old)); i <= top; ++i) {
      const auto r = env_.rate_at(i);
      a_[std::size_t(i)] = r.a;
      b_[std::size_t(i)] = r.b;
    }
  }

  double service_rate(std::int64_t k) const { return b_[std::size_t(k)] + a_[std::size_t(k + 1)]; }

  void touch(std::int64_t k) {
    if (k > std::int64_t(hists_.size())) return;
    auto& last = last_touch_[std::size_t(k - 1)];
    const double start = std::max(last, hist_from_);
    if (state_.clock > start) hists_[std::size_t(k - 1)].add(state_.gap(k), state_.clock - start);
    last = state_.clock;
  }

  void change(std::int64_t k, std::int64_t n) {
    touch(k);
    const bool was_empty = state_.gap(k) == 0;
    state_.add(k, n);
    const bool is_empty = state_.gap(k) == 0;
    if (was_empty && !is_empty) index_.set(k, service_rate(k));
    else if (!was_empty && is_empty) index_.set(k, 0.0);
  }

  void fire(EventRecord& rec) {
    double u = rng_.uniform() * total_rate();
    if (u < arrival_rate_) {
      change(1, +1);
      state_.x1 -= 1;
      state_.entered += 1;
      rec.kind = EventKind::arrival;
      rec.queue = 1;
    } else if ((u -= arrival_rate_) < injection_rate_) {
      change(finite_->queues, +1);
      state_.injected_right += 1;
      rec.kind = EventKind::injection;
      rec.queue = finite_->queues;
    } else {
      u -= injection_rate_;
      const auto [k, residual] = index_.find(u);
      if (state_.gap(k) == 0) {
        rec.kind = EventKind::none;
      } else if (residual < b_[std::size_t(k)]) {
        change(k, -1);
        rec.queue = k;
        if (k == 1) {
          state_.x1 += 1;
          state_.exited += 1;
          rec.kind = EventKind::departure;
        } else {
          change(k - 1, +1);
          rec.kind = EventKind::move_left;
        }
      } else {
        rec.queue = k;
        if (finite_ && k == finite_->queues) {
          change(k, -1);
          state_.exited_right += 1;
          rec.kind = EventKind::exit_right;
        } else {
          if (k + 1 > frontier_cap_)
            throw SimulationAbort("simulation reached the frontier cap " + std::to_string(frontier_cap_) +
                                  " at t = " + std::to_string(state_.clock));
          ensure_rates(k + 2);
          change(k, -1);
          change(k + 1, +1);
          rec.kind = EventKind::move_right;
        }
      }
    }
    counts_.count(rec.kind);
  }

  RateEnvironment env_;
  GapState state_;
  Rng rng_;
  std::optional<FiniteSystem> finite_;
  std::int64_t frontier_cap_ = kDefaultFrontierCap;
  double arrival_rate_ = 0.0;
  double injection_rate_ = 0.0;
  std::vector<double> a_, b_;
  RateIndex index_;
  EventCounts counts_;
  std::vector<MarginalHistogram> hists_;
  std::vector<double> last_touch_;
  double hist_from_ = 0.0;
};

struct SimulationConfig {
  RateEnvironment env;
  InitialCondition initial = Heaviside{};
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> snapshot_times;  // takes precedence over snapshot_count
  std::int64_t snapshot_count = 0;     // evenly spaced on (0, horizon]
  std::int64_t window = 32;
  std::optional<double> burn_in;       // default: 10% of the horizon
  bool histograms = true;
  std::optional<FiniteSystem> finite;
  std::int64_t frontier_cap = 0;
};

struct Snapshot {
  double t = 0.0;
  std::int64_t x1 = 0;
  std::int64_t total_customers = 0;
  std::vector<std::int64_t> gaps;  // eta_1..eta_window
};

struct RunSummary {
  std::uint64_t seed = 0;
  double horizon = 0.0;
  double burn_in = 0.0;
  std::int64_t window = 0;
  EventCounts events;
  std::vector<Snapshot> snapshots;
  std::vector<MarginalHistogram> histograms;
  GapState final_state;
};

inline GapState initial_state(const SimulationConfig& cfg) {
  return std::visit(
      [&](const auto& init) -> GapState {
        using T = std::decay_t<decltype(init)>;
        if constexpr (std::is_same_v<T, Heaviside>) {
          return GapState{};
        } else if constexpr (std::is_same_v<T, ExplicitGaps>) {
          return GapState::from_gaps(init.gaps, init.x1);
        } else {
          if (init.n_trunc < 0) throw ConfigError("product_geometric: n_trunc must be >= 0");
          std::vector<double> rho = init.rho;
          if (rho.empty() && init.n_trunc > 0) {
            const double v0 = compute_v0(cfg.env).v0;
            const auto sol = solve_rho(cfg.env, v0, init.n_trunc);
            if (!sol.admissible) throw HypothesisError("product_geometric: no admissible minimal solution");
            rho = sol.rho;
          }
          if (std::int64_t(rho.size()) < init.n_trunc)
            throw ConfigError("product_geometric: rho list shorter than n_trunc");
          Rng rng(cfg.seed, 1);
          GapState s;
          for (std::int64_t k = 1; k <= init.n_trunc; ++k) {
            const double r = rho[std::size_t(k - 1)];
            if (!(r >= 0.0 && r < 1.0)) throw ConfigError("product_geometric: rho_k must lie in [0, 1)");
            const std::int64_t n = rng.geometric(1.0 - r);
            if (n > 0) s.add(k, n);
          }
          return s;
        }
      },
      cfg.initial);
}

inline std::vector<double> snapshot_schedule(const SimulationConfig& cfg) {
  std::vector<double> times = cfg.snapshot_times;
  if (times.empty() && cfg.snapshot_count > 0) {
    for (std::int64_t i = 1; i <= cfg.snapshot_count; ++i)
      times.push_back(cfg.horizon * double(i) / double(cfg.snapshot_count));
  }
  std::sort(times.begin(), times.end());
  for (double t : times)
    if (t < 0.0 || t > cfg.horizon) throw ConfigError("snapshot times must lie in [0, horizon]");
  return times;
}

inline Snapshot take_snapshot(const GapState& s, std::int64_t window) {
  Snapshot snap;
  snap.t = s.clock;
  snap.x1 = s.x1;
  snap.total_customers = s.total_customers;
  snap.gaps.resize(std::size_t(window));
  for (std::int64_t k = 1; k <= window; ++k) snap.gaps[std::size_t(k - 1)] = s.gap(k);
  return snap;
}

inline RunSummary run(const SimulationConfig& cfg) {
  if (!(cfg.horizon >= 0.0) || !std::isfinite(cfg.horizon)) throw ConfigError("horizon must be finite and >= 0");
  if (cfg.window < 1) throw ConfigError("window must be >= 1");
  RunSummary out;
  out.seed = cfg.seed;
  out.horizon = cfg.horizon;
  out.burn_in = cfg.burn_in.value_or(0.1 * cfg.horizon);
  if (out.burn_in < 0.0 || out.burn_in > cfg.horizon) throw ConfigError("burn_in must lie in [0, horizon]");
  out.window = cfg.finite ? std::min(cfg.window, cfg.finite->queues) : cfg.window;

  Simulator sim(cfg.env, initial_state(cfg), cfg.seed, cfg.finite, cfg.frontier_cap);
  if (cfg.histograms) sim.track_histograms(out.window, out.burn_in);
  for (double t : snapshot_schedule(cfg)) {
    sim.run_until(t);
    out.snapshots.push_back(take_snapshot(sim.state(), out.window));
  }
  sim.run_until(cfg.horizon);
  if (cfg.histograms) out.histograms = sim.histograms();
  out.events = sim.counts();
  out.final_state = sim.state();
  return out;
}

}  // namespace excloud
