#pragma once

// Rate environments (a_k, b_k), k >= 1: particle k jumps left at rate a_k and
// right at rate b_k. A finite prefix is followed by an analytic tail so that
// tail behaviour (summability, admissibility) stays decidable.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "excloud/error.hpp"

namespace excloud {

struct Rates {
  double a = 0.0;  // left jump rate
  double b = 0.0;  // right jump rate
};

/// a_k = a, b_k = b for every k beyond the prefix.
struct ConstantTail {
  double a = 1.0;
  double b = 1.0;
};

/// a_k = scale * k!, b_k = (k+1)! for every k beyond the prefix.
struct FactorialTail {
  double scale = 1.0;
};

/// Environment defined only on its prefix (finite systems).
struct NoTail {};

/// Programmatic tail. Its analytic behaviour is unknown, so every verdict
/// that depends on it is reported as bounded-depth only.
struct CustomTail {
  std::function<Rates(std::int64_t)> rule;
};

using Tail = std::variant<ConstantTail, FactorialTail, NoTail, CustomTail>;

enum class Verdict { holds, fails, undecidable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::undecidable: return "undecidable";
  }
  return "?";
}

struct HypothesisFlags {
  Verdict a0 = Verdict::undecidable;  // 0 < a_k, b_k < inf
  Verdict a1 = Verdict::undecidable;  // sum 1/a_k = inf
  Verdict a2 = Verdict::undecidable;  // sup a_k, sup b_k < inf
};

class RateEnvironment {
 public:
  RateEnvironment() = default;
  RateEnvironment(std::vector<Rates> prefix, Tail tail)
      : prefix_(std::move(prefix)), tail_(std::move(tail)) {
    for (const auto& r : prefix_) {
      if (!(r.a >= 0.0) || !(r.b >= 0.0) || !std::isfinite(r.a) || !std::isfinite(r.b))
        throw ConfigError("rate environment: prefix rates must be finite and non-negative");
    }
    if (const auto* c = std::get_if<ConstantTail>(&tail_)) {
      if (!(c->a >= 0.0) || !(c->b >= 0.0) || !std::isfinite(c->a) || !std::isfinite(c->b))
        throw ConfigError("rate environment: constant tail rates must be finite and non-negative");
    }
    if (const auto* f = std::get_if<FactorialTail>(&tail_)) {
      if (!(f->scale > 0.0) || !std::isfinite(f->scale))
        throw ConfigError("rate environment: factorial tail scale must be positive");
    }
    if (const auto* u = std::get_if<CustomTail>(&tail_)) {
      if (!u->rule) throw ConfigError("rate environment: custom tail without a rule");
    }
  }

  const std::vector<Rates>& prefix() const { return prefix_; }
  std::int64_t prefix_length() const { return static_cast<std::int64_t>(prefix_.size()); }
  const Tail& tail() const { return tail_; }

  bool has_tail() const { return !std::holds_alternative<NoTail>(tail_); }
  bool analytic_tail() const {
    return std::holds_alternative<ConstantTail>(tail_) ||
           std::holds_alternative<FactorialTail>(tail_);
  }

  /// Largest valid index, or max int64 when the tail makes the environment total.
  std::int64_t max_index() const {
    return has_tail() ? std::numeric_limits<std::int64_t>::max() : prefix_length();
  }

  Rates rate_at(std::int64_t k) const {
    check_index(k);
    if (k <= prefix_length()) return prefix_[static_cast<std::size_t>(k - 1)];
    return std::visit(
        [k](const auto& t) -> Rates {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, ConstantTail>) {
            return {t.a, t.b};
          } else if constexpr (std::is_same_v<T, FactorialTail>) {
            if (k > 150) {
              return {std::exp(std::log(t.scale) + std::lgamma(double(k) + 1.0)),
                      std::exp(std::lgamma(double(k) + 2.0))};
            }
            double f = 1.0;
            for (std::int64_t j = 2; j <= k; ++j) f *= double(j);
            return {t.scale * f, f * double(k + 1)};
          } else if constexpr (std::is_same_v<T, CustomTail>) {
            return t.rule(k);
          } else {
            return {};  // unreachable, check_index rejects NoTail beyond prefix
          }
        },
        tail_);
  }

  /// (log a_k, log b_k); finite for factorial tails far beyond double range.
  std::pair<double, double> log_rate_at(std::int64_t k) const {
    check_index(k);
    if (k > prefix_length()) {
      if (const auto* f = std::get_if<FactorialTail>(&tail_)) {
        return {std::log(f->scale) + std::lgamma(double(k) + 1.0), std::lgamma(double(k) + 2.0)};
      }
    }
    const Rates r = rate_at(k);
    return {std::log(r.a), std::log(r.b)};
  }

 private:
  void check_index(std::int64_t k) const {
    if (k < 1) throw IndexError("rate_at: index must be >= 1, got " + std::to_string(k));
    if (k > max_index())
      throw IndexError("rate_at: index " + std::to_string(k) +
                       " beyond prefix of an environment without tail (length " +
                       std::to_string(prefix_length()) + ")");
  }

  std::vector<Rates> prefix_;
  Tail tail_ = NoTail{};
};

inline Rates rate_at(const RateEnvironment& env, std::int64_t k) { return env.rate_at(k); }

inline HypothesisFlags check_hypotheses(const RateEnvironment& env) {
  HypothesisFlags flags;
  bool prefix_positive = true;
  for (const auto& r : env.prefix()) {
    if (!(r.a > 0.0) || !(r.b > 0.0)) prefix_positive = false;
  }

  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ConstantTail>) {
          const bool tail_positive = t.a > 0.0 && t.b > 0.0;
          flags.a0 = (prefix_positive && tail_positive) ? Verdict::holds : Verdict::fails;
          // finitely many prefix terms cannot change divergence of sum 1/a_k
          flags.a1 = Verdict::holds;
          flags.a2 = Verdict::holds;
        } else if constexpr (std::is_same_v<T, FactorialTail>) {
          flags.a0 = prefix_positive ? Verdict::holds : Verdict::fails;
          flags.a1 = Verdict::fails;
          flags.a2 = Verdict::fails;
        } else if constexpr (std::is_same_v<T, NoTail>) {
          flags.a0 = prefix_positive ? Verdict::holds : Verdict::fails;
        } else {
          flags.a0 = prefix_positive ? Verdict::undecidable : Verdict::fails;
        }
      },
      env.tail());
  return flags;
}

inline void require_a0(const RateEnvironment& env, const char* who) {
  const auto flags = check_hypotheses(env);
  if (flags.a0 == Verdict::fails)
    throw HypothesisError(std::string(who) + ": positivity of all rates (A0) fails");
}

/// The example environments used throughout the test-suite and configs.
namespace envs {

inline RateEnvironment homogeneous(double a, double b) { return {{}, ConstantTail{a, b}}; }

/// Leftmost particle (a, b), all others (c, c).
inline RateEnvironment dog_sheep(double a, double b, double c) {
  return {{{a, b}}, ConstantTail{c, c}};
}

/// a_1 = b_1 = 1, then (a, b) with a > b.
inline RateEnvironment one_sheep_many_dogs(double a, double b) {
  return {{{1.0, 1.0}}, ConstantTail{a, b}};
}

inline RateEnvironment factorial(double scale) { return {{}, FactorialTail{scale}}; }

}  // namespace envs

}  // namespace excloud
