#pragma once

// JSON forms of environments, initial conditions and results.
//
//   environment: {"prefix": [[a, b], ...],
//                 "tail": {"kind": "constant", "a": .., "b": ..}
//                       | {"kind": "factorial", "a": ..} | {"kind": "none"}}
//   initial:     {"kind": "heaviside"}
//              | {"kind": "explicit", "gaps": [[k, n], ...], "x1": ..}
//              | {"kind": "product_geometric", "rho": [...], "n_trunc": ..}

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "excloud/engine.hpp"
#include "excloud/error.hpp"
#include "excloud/histogram.hpp"
#include "excloud/rates.hpp"

namespace excloud {

using json = nlohmann::json;

/// Rejects keys outside `allowed`.
inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("key \"") + key + "\": " + e.what());
  }
}

template <class T>
T get_required(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key \"" + key + "\"");
  return get_or<T>(j, key, T{});
}

inline RateEnvironment env_from_json(const json& j) {
  check_keys(j, {"prefix", "tail"}, "env");
  std::vector<Rates> prefix;
  if (j.contains("prefix")) {
    for (const auto& pair : j.at("prefix")) {
      if (!pair.is_array() || pair.size() != 2) throw ConfigError("env.prefix: entries must be [a, b] pairs");
      prefix.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
  }
  const json tail = j.value("tail", json{{"kind", "none"}});
  const std::string kind = get_required<std::string>(tail, "kind", "env.tail");
  if (kind == "constant") {
    check_keys(tail, {"kind", "a", "b"}, "env.tail");
    return {prefix, ConstantTail{get_required<double>(tail, "a", "env.tail"), get_required<double>(tail, "b", "env.tail")}};
  }
  if (kind == "factorial") {
    check_keys(tail, {"kind", "a"}, "env.tail");
    return {prefix, FactorialTail{get_required<double>(tail, "a", "env.tail")}};
  }
  if (kind == "none") {
    check_keys(tail, {"kind"}, "env.tail");
    return {prefix, NoTail{}};
  }
  throw ConfigError("env.tail: unknown kind \"" + kind + "\"");
}

inline json env_to_json(const RateEnvironment& env) {
  json prefix = json::array();
  for (const auto& r : env.prefix()) prefix.push_back({r.a, r.b});
  json tail;
  if (const auto* c = std::get_if<ConstantTail>(&env.tail())) tail = {{"kind", "constant"}, {"a", c->a}, {"b", c->b}};
  else if (const auto* f = std::get_if<FactorialTail>(&env.tail())) tail = {{"kind", "factorial"}, {"a", f->scale}};
  else if (std::holds_alternative<NoTail>(env.tail())) tail = {{"kind", "none"}};
  else tail = {{"kind", "custom"}};
  return {{"prefix", prefix}, {"tail", tail}};
}

inline std::map<std::int64_t, std::int64_t> gaps_from_json(const json& j) {
  std::map<std::int64_t, std::int64_t> gaps;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) throw ConfigError("gaps: entries must be [k, n] pairs");
    gaps[pair[0].get<std::int64_t>()] += pair[1].get<std::int64_t>();
  }
  return gaps;
}

inline json gaps_to_json(const GapState& s) {
  json out = json::array();
  for (const auto& [k, n] : s.occupied()) out.push_back({k, n});
  return out;
}

inline InitialCondition initial_from_json(const json& j) {
  const std::string kind = get_required<std::string>(j, "kind", "initial");
  if (kind == "heaviside") {
    check_keys(j, {"kind"}, "initial");
    return Heaviside{};
  }
  if (kind == "explicit") {
    check_keys(j, {"kind", "gaps", "x1"}, "initial");
    return ExplicitGaps{gaps_from_json(j.value("gaps", json::array())), get_or<std::int64_t>(j, "x1", 0)};
  }
  if (kind == "product_geometric") {
    check_keys(j, {"kind", "rho", "n_trunc"}, "initial");
    return ProductGeometric{get_or<std::vector<double>>(j, "rho", {}), get_required<std::int64_t>(j, "n_trunc", "initial")};
  }
  throw ConfigError("initial: unknown kind \"" + kind + "\"");
}

inline GapState gap_state_from_json(const json& j) {
  const auto init = initial_from_json(j);
  if (std::holds_alternative<Heaviside>(init)) return GapState{};
  if (const auto* e = std::get_if<ExplicitGaps>(&init)) return GapState::from_gaps(e->gaps, e->x1);
  throw ConfigError("initial: only heaviside and explicit states are allowed here");
}

inline std::optional<FiniteSystem> finite_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  check_keys(j, {"queues", "boundary"}, "finite");
  FiniteSystem f;
  f.queues = get_required<std::int64_t>(j, "queues", "finite");
  const std::string b = get_or<std::string>(j, "boundary", "closed");
  if (b == "closed") f.boundary = FiniteBoundary::closed;
  else if (b == "lower") f.boundary = FiniteBoundary::lower;
  else throw ConfigError("finite.boundary: expected \"closed\" or \"lower\"");
  return f;
}

/// Non-finite doubles are written as strings so the output stays valid JSON.
inline json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline json histogram_to_json(const MarginalHistogram& h) {
  json probs = json::array();
  for (std::size_t m = 0; m < h.weights.size(); ++m) probs.push_back(h.probability(std::int64_t(m)));
  return {{"queue", h.queue}, {"total_time", h.total_time}, {"probabilities", probs}};
}

}  // namespace excloud
