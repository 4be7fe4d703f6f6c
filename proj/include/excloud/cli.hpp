#pragma once

// Batch front end: one JSON config per run, one subcommand per invocation.
// Every subcommand writes <out>/<subcommand>.json (plus CSV series where
// relevant) and <out>/manifest.json. Exit codes: 0 success, 2 a tolerance
// check failed, 1 configuration or runtime error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "excloud/coupling.hpp"
#include "excloud/engine.hpp"
#include "excloud/json_io.hpp"
#include "excloud/oracle.hpp"
#include "excloud/rates.hpp"
#include "excloud/replicates.hpp"
#include "excloud/stats.hpp"
#include "excloud/traffic.hpp"
#include "excloud/walk.hpp"

#ifndef EXCLOUD_VERSION
#define EXCLOUD_VERSION "unknown"
#endif

namespace excloud::cli {

inline const std::set<std::string>& subcommands() {
  static const std::set<std::string> names{"traffic", "classify", "simulate", "couple",
                                           "oracle",  "converge", "speed",    "scaling"};
  return names;
}

struct Options {
  std::string subcommand;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> replicates;
  unsigned jobs = 1;
};

struct OutputFile {
  std::string name;
  std::string content;
};

struct CommandResult {
  json report;
  bool pass = true;
  std::vector<OutputFile> files;
};

inline std::uint64_t seed_of(const json& cfg, const Options& opt) {
  return opt.seed ? *opt.seed : get_or<std::uint64_t>(cfg, "seed", 0);
}

inline std::int64_t replicates_of(const json& cfg, const Options& opt, std::int64_t fallback) {
  const std::int64_t n = opt.replicates ? *opt.replicates : get_or<std::int64_t>(cfg, "replicates", fallback);
  if (n < 1) throw ConfigError("replicates must be >= 1");
  return n;
}

inline std::string format_double(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << x;
  return os.str();
}

inline json speed_set_json(const SpeedSet& s) {
  json v = {{"shape", to_string(s.right_end)}, {"exact", s.exact}, {"boundary_tie", s.boundary_tie}};
  if (!s.exact) v["bounded_depth"] = s.bounded_depth;
  if (s.empty()) {
    v["left"] = nullptr;
    v["right"] = nullptr;
    v["right_open"] = nullptr;
  } else {
    v["left"] = number(s.v0);
    v["right"] = number(s.v1);
    v["right_open"] = s.right_end == RightEnd::open;
  }
  return v;
}

inline CommandResult cmd_traffic(const json& cfg, const Options&) {
  check_keys(cfg, {"env", "depth", "kmax", "seed"}, "traffic");
  const RateEnvironment env = env_from_json(get_required<json>(cfg, "env", "traffic"));
  const std::int64_t kmax = get_or<std::int64_t>(cfg, "kmax", kDefaultKmax);
  std::int64_t depth = get_or<std::int64_t>(cfg, "depth", 10);
  if (depth < 1) throw ConfigError("traffic: depth must be >= 1");
  depth = std::min(depth, env.max_index());

  const auto flags = check_hypotheses(env);
  const auto v0 = compute_v0(env, kSeriesTol, kmax);
  const auto set = admissible_set(env, kmax);
  const auto vf = classify_vf(env, kmax);
  const auto sol = solve_rho(env, v0.v0, depth);
  const auto tables = compute_tables(env, depth);
  const auto limsup = limsup_alpha_beta(env);

  json alpha = json::array(), beta = json::array(), rho = json::array();
  for (std::int64_t k = 1; k <= depth; ++k) {
    alpha.push_back(number(tables.alpha(k)));
    beta.push_back(number(tables.beta(k)));
    rho.push_back(number(sol.rho[std::size_t(k - 1)]));
  }
  CommandResult out;
  out.report = {
      {"env", env_to_json(env)},
      {"hypotheses", {{"A0", to_string(flags.a0)}, {"A1", to_string(flags.a1)}, {"A2", to_string(flags.a2)}}},
      {"v0", number(v0.v0)},
      {"status", to_string(v0.status)},
      {"v0_bracket", {number(v0.lower), number(v0.upper)}},
      {"V", speed_set_json(set)},
      {"rho_prefix", rho},
      {"rho_admissible", sol.admissible},
      {"rho_summable", to_string(sol.summable)},
      {"rho_tail_limit", sol.tail_limit ? number(*sol.tail_limit) : json(nullptr)},
      {"alpha_prefix", alpha},
      {"beta_prefix", beta},
      {"limsup_alpha", number(limsup.alpha)},
      {"limsup_beta", number(limsup.beta)},
      {"vf_class", to_string(vf.cls)},
      {"vf_exact", vf.exact},
  };
  if (vf.cls == VfClass::singleton_negative) out.report["vf_speed"] = number(vf.v);
  return out;
}

inline CommandResult cmd_classify(const json& cfg, const Options& opt) {
  check_keys(cfg, {"env", "kmax", "walkers", "horizon", "seed"}, "classify");
  const RateEnvironment env = env_from_json(get_required<json>(cfg, "env", "classify"));
  const std::int64_t kmax = get_or<std::int64_t>(cfg, "kmax", kDefaultKmax);
  const auto c = classify(env, kmax);
  const auto v0 = compute_v0(env, kSeriesTol, kmax);
  CommandResult out;
  out.report = {{"class", to_string(c.cls)},
                {"p0", number(c.p0)},
                {"p0_bracket", {number(c.p0_lower), number(c.p0_upper)}},
                {"exactness", to_string(c.exactness)},
                {"v0", number(v0.v0)},
                {"v0_consistency", number(std::abs(v0.v0) - env.rate_at(1).a * c.p0)}};
  const std::int64_t walkers = get_or<std::int64_t>(cfg, "walkers", 0);
  if (walkers > 0) {
    const std::int64_t horizon = get_or<std::int64_t>(cfg, "horizon", 10'000);
    const double f = escape_fraction(env, walkers, horizon, seed_of(cfg, opt));
    out.report["escape_fraction"] = f;
    out.report["escape_standard_error"] = std::sqrt(f * (1.0 - f) / double(walkers));
    out.report["walkers"] = walkers;
    out.report["walk_horizon"] = horizon;
  }
  return out;
}

/// Engine configuration shared by simulate, converge, speed and scaling.
inline SimulationConfig simulation_config(const json& cfg, const std::string& where) {
  SimulationConfig sc;
  sc.env = env_from_json(get_required<json>(cfg, "env", where));
  sc.initial = initial_from_json(cfg.value("initial", json{{"kind", "heaviside"}}));
  sc.horizon = get_required<double>(cfg, "horizon", where);
  sc.window = get_or<std::int64_t>(cfg, "window", 32);
  if (cfg.contains("burn_in")) sc.burn_in = cfg.at("burn_in").get<double>();
  sc.finite = finite_from_json(cfg.value("finite", json(nullptr)));
  sc.frontier_cap = get_or<std::int64_t>(cfg, "frontier_cap", 0);
  return sc;
}

inline std::string snapshots_csv(const RunSummary& r) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "t,x1,total_customers";
  for (std::int64_t k = 1; k <= r.window; ++k) os << ",eta_" << k;
  os << "\n";
  for (const auto& s : r.snapshots) {
    os << format_double(s.t) << "," << s.x1 << "," << s.total_customers;
    for (auto g : s.gaps) os << "," << g;
    os << "\n";
  }
  return os.str();
}

inline CommandResult cmd_simulate(const json& cfg, const Options& opt) {
  check_keys(cfg,
             {"env", "initial", "horizon", "seed", "snapshot_count", "snapshot_times", "window", "burn_in", "finite",
              "frontier_cap", "replicates", "histograms"},
             "simulate");
  SimulationConfig base = simulation_config(cfg, "simulate");
  base.snapshot_count = get_or<std::int64_t>(cfg, "snapshot_count", 0);
  base.snapshot_times = get_or<std::vector<double>>(cfg, "snapshot_times", {});
  base.histograms = get_or<bool>(cfg, "histograms", true);
  const std::uint64_t seed = seed_of(cfg, opt);
  const std::int64_t n = replicates_of(cfg, opt, 1);
  const auto runs = run_replicates(n, opt.jobs, [&](std::int64_t r) {
    SimulationConfig c = base;
    c.seed = replicate_seed(seed, r);
    return run(c);
  });
  CommandResult out;
  json reps = json::array();
  for (std::int64_t r = 0; r < n; ++r) {
    const auto& s = runs[std::size_t(r)];
    json hists = json::array();
    for (const auto& h : s.histograms) hists.push_back(histogram_to_json(h));
    const auto& e = s.events;
    reps.push_back({{"replicate", r},
                    {"seed", s.seed},
                    {"events",
                     {{"total", e.total()},
                      {"arrivals", e.arrivals},
                      {"departures", e.departures},
                      {"moves_left", e.moves_left},
                      {"moves_right", e.moves_right},
                      {"injections", e.injections},
                      {"exits_right", e.exits_right},
                      {"null", e.null_events}}},
                    {"final",
                     {{"t", s.final_state.clock},
                      {"x1", s.final_state.x1},
                      {"total_customers", s.final_state.total_customers},
                      {"frontier", s.final_state.frontier},
                      {"entered", s.final_state.entered},
                      {"exited", s.final_state.exited},
                      {"gaps", gaps_to_json(s.final_state)}}},
                    {"burn_in", s.burn_in},
                    {"histograms", hists}});
    if (!s.snapshots.empty())
      out.files.push_back({"simulate_r" + std::to_string(r) + ".csv", snapshots_csv(s)});
  }
  out.report = {{"horizon", base.horizon}, {"seed", seed}, {"replicates", reps}};
  return out;
}

inline CommandResult cmd_couple(const json& cfg, const Options& opt) {
  check_keys(cfg, {"env", "mode", "N", "window", "cap", "seed", "initial", "upper", "record_every"}, "couple");
  const RateEnvironment env = env_from_json(get_required<json>(cfg, "env", "couple"));
  const std::string mode = get_or<std::string>(cfg, "mode", "sandwich");
  const double window = get_required<double>(cfg, "window", "couple");
  const std::int64_t cap = get_or<std::int64_t>(cfg, "cap", 256);
  const GapState initial = gap_state_from_json(cfg.value("initial", json{{"kind", "heaviside"}}));
  const auto field = build_field(env, window, cap, seed_of(cfg, opt));
  CommandResult out;
  if (mode == "sandwich") {
    const std::int64_t N = get_required<std::int64_t>(cfg, "N", "couple");
    const auto every = get_or<std::size_t>(cfg, "record_every", 100);
    const auto rep = sandwich_run(initial, field, N, every);
    json first = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(rep.violations.size(), 20); ++i) {
      const auto& v = rep.violations[i];
      first.push_back({{"arrow", v.arrow}, {"time", v.time}, {"queue", v.queue}, {"what", v.what}});
    }
    out.report = {{"mode", mode},
                  {"N", N},
                  {"arrows", rep.arrows},
                  {"checks", rep.checks},
                  {"violations", rep.violations.size()},
                  {"first_violations", first},
                  {"final_x1", {{"lower", rep.lower.x1}, {"system", rep.system.x1}, {"upper", rep.upper.x1}}}};
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << "t,x1_lower,x1,x1_upper,total_lower,total,total_upper\n";
    for (const auto& p : rep.trajectory)
      os << format_double(p.time) << "," << p.x1_lower << "," << p.x1 << "," << p.x1_upper << "," << p.total_lower
         << "," << p.total << "," << p.total_upper << "\n";
    out.files.push_back({"couple.csv", os.str()});
    out.pass = rep.violations.empty();
  } else if (mode == "two_class") {
    const GapState upper = gap_state_from_json(get_required<json>(cfg, "upper", "couple"));
    const auto rep = two_class_run(initial, upper, field);
    out.report = {{"mode", mode},
                  {"arrows", rep.arrows},
                  {"violations", rep.violations.size()},
                  {"projection_mismatches", rep.projection_mismatches},
                  {"first_class_mismatches", rep.first_class_mismatches},
                  {"final_first_class", gaps_to_json(rep.final_state.first)},
                  {"final_second_class", gaps_to_json(rep.final_state.second)}};
    out.pass = rep.violations.empty() && rep.projection_mismatches == 0 && rep.first_class_mismatches == 0;
  } else {
    throw ConfigError("couple: mode must be \"sandwich\" or \"two_class\"");
  }
  out.report["pass"] = out.pass;
  return out;
}

inline CommandResult cmd_oracle(const json& cfg, const Options&) {
  check_keys(cfg, {"env", "N", "C", "boundary", "mode", "t", "initial", "max_boundary_mass", "compare_rho", "seed"},
             "oracle");
  const RateEnvironment env = env_from_json(get_required<json>(cfg, "env", "oracle"));
  const std::int64_t N = get_required<std::int64_t>(cfg, "N", "oracle");
  const std::int64_t C = get_required<std::int64_t>(cfg, "C", "oracle");
  const std::string b = get_or<std::string>(cfg, "boundary", "lower");
  if (b != "lower" && b != "closed_finite") throw ConfigError("oracle: boundary must be lower or closed_finite");
  const TruncatedChain chain(env, N, C, b == "lower" ? ChainBoundary::lower : ChainBoundary::closed_finite);
  const std::string mode = get_or<std::string>(cfg, "mode", "stationary");
  CommandResult out;
  Eigen::VectorXd p;
  out.report = {{"N", N}, {"C", C}, {"boundary", b}, {"mode", mode}, {"states", chain.size()},
                {"encoding", "lexicographic rank of (eta_1..eta_N) with sum <= C"}};
  if (mode == "stationary") {
    const auto st = stationary(chain, get_or<double>(cfg, "max_boundary_mass", 1e-6));
    p = st.pi;
    out.report["residual"] = st.residual;
    out.report["boundary_mass"] = st.boundary_mass;
  } else if (mode == "transient") {
    std::vector<std::int64_t> init = get_or<std::vector<std::int64_t>>(cfg, "initial", std::vector<std::int64_t>(std::size_t(N), 0));
    const double t = get_required<double>(cfg, "t", "oracle");
    const auto tr = transient_distribution(chain, init, t);
    p = tr.p;
    out.report["t"] = t;
    out.report["initial"] = init;
    out.report["truncation_error"] = tr.truncation_error;
    out.report["terms"] = tr.terms;
    out.report["boundary_mass"] = tr.boundary_mass;
  } else {
    throw ConfigError("oracle: mode must be \"stationary\" or \"transient\"");
  }
  json marg = json::array();
  for (std::int64_t k = 1; k <= N; ++k) marg.push_back(chain.marginal(p, k));
  out.report["marginals"] = marg;
  out.report["distribution"] = std::vector<double>(p.data(), p.data() + p.size());
  if (cfg.contains("compare_rho")) {
    const auto rho = cfg.at("compare_rho").get<std::vector<double>>();
    out.report["tv_to_conditioned_product_form"] = total_variation(p, product_form(chain, rho));
    json tvs = json::array();
    for (std::int64_t k = 1; k <= N; ++k) tvs.push_back(tv_to_geometric(chain.marginal(p, k), rho[std::size_t(k - 1)]));
    out.report["marginal_tv_to_geometric"] = tvs;
  }
  return out;
}

/// Reference occupancies: a configured list, the finite-system solution, or
/// the minimal admissible solution.
inline std::vector<double> reference_rho(const json& cfg, const SimulationConfig& sc, std::int64_t queues) {
  if (cfg.contains("rho")) {
    auto rho = cfg.at("rho").get<std::vector<double>>();
    if (std::int64_t(rho.size()) < queues) throw ConfigError("rho list shorter than the number of queues");
    rho.resize(std::size_t(queues));
    return rho;
  }
  if (sc.finite) {
    const auto fs = finite_speed(sc.env, sc.finite->queues);
    auto rho = sc.finite->boundary == FiniteBoundary::closed ? fs.rho : fs.rho_lower;
    if (std::int64_t(rho.size()) < queues) throw ConfigError("more queues requested than the finite system has");
    rho.resize(std::size_t(queues));
    return rho;
  }
  const auto sol = solve_rho(sc.env, compute_v0(sc.env).v0, queues);
  if (!sol.admissible) throw HypothesisError("converge: the minimal solution is not admissible");
  return sol.rho;
}

inline CommandResult cmd_converge(const json& cfg, const Options& opt) {
  check_keys(cfg,
             {"env", "initial", "horizon", "burn_in", "queues", "replicates", "seed", "mode", "rho", "finite",
              "tolerance", "frontier_cap", "window"},
             "converge");
  SimulationConfig base = simulation_config(cfg, "converge");
  const std::int64_t queues = get_or<std::int64_t>(cfg, "queues", 5);
  if (queues < 1) throw ConfigError("converge: queues must be >= 1");
  base.window = std::max(base.window, queues);
  const std::string mode = get_or<std::string>(cfg, "mode", "time_average");
  if (mode != "time_average" && mode != "terminal" && mode != "joint_terminal")
    throw ConfigError("converge: mode must be time_average, terminal or joint_terminal");
  base.histograms = mode == "time_average";
  const double tol = get_required<double>(cfg, "tolerance", "converge");
  const auto rho = reference_rho(cfg, base, queues);
  const std::uint64_t seed = seed_of(cfg, opt);
  const std::int64_t n = replicates_of(cfg, opt, 20);
  const auto runs = run_replicates(n, opt.jobs, [&](std::int64_t r) {
    SimulationConfig c = base;
    c.seed = replicate_seed(seed, r);
    return run(c);
  });
  CommandResult out;
  out.report = {{"mode", mode}, {"rho", rho}, {"tolerance", tol}, {"replicates", n}, {"seed", seed}};
  if (mode == "time_average") {
    json per = json::array();
    bool pass = true;
    for (std::int64_t k = 1; k <= queues; ++k) {
      std::vector<double> tvs;
      for (const auto& s : runs) tvs.push_back(tv_to_geometric(s.histograms[std::size_t(k - 1)], rho[std::size_t(k - 1)]));
      const double med = median(tvs);
      pass = pass && med <= tol;
      per.push_back({{"queue", k}, {"median_tv", med}, {"tvs", tvs}});
    }
    out.report["per_queue"] = per;
    out.pass = pass;
  } else if (mode == "terminal") {
    json per = json::array();
    bool pass = true;
    for (std::int64_t k = 1; k <= queues; ++k) {
      std::vector<std::int64_t> samples;
      for (const auto& s : runs) samples.push_back(s.final_state.gap(k));
      const double tv = tv_to_geometric(empirical_law(samples), rho[std::size_t(k - 1)]);
      pass = pass && tv <= tol;
      per.push_back({{"queue", k}, {"tv", tv}});
    }
    out.report["per_queue"] = per;
    out.pass = pass;
  } else {
    std::vector<std::vector<std::int64_t>> samples;
    for (const auto& s : runs) {
      std::vector<std::int64_t> v;
      for (std::int64_t k = 1; k <= queues; ++k) v.push_back(s.final_state.gap(k));
      samples.push_back(v);
    }
    const double tv = joint_tv_to_product_geometric(samples, rho);
    out.report["joint_tv"] = tv;
    out.pass = tv <= tol;
  }
  out.report["pass"] = out.pass;
  return out;
}

inline std::vector<TimePoint> x1_path(const RunSummary& r) {
  std::vector<TimePoint> path;
  for (const auto& s : r.snapshots) path.push_back({s.t, double(s.x1)});
  return path;
}

inline CommandResult cmd_speed(const json& cfg, const Options& opt) {
  check_keys(cfg,
             {"env", "initial", "horizon", "burn_in", "replicates", "seed", "snapshot_count", "batches", "expected",
              "tolerance", "frontier_cap", "finite"},
             "speed");
  SimulationConfig base = simulation_config(cfg, "speed");
  base.window = 1;
  base.histograms = false;
  base.snapshot_count = get_or<std::int64_t>(cfg, "snapshot_count", 200);
  const double burn = base.burn_in.value_or(0.1 * base.horizon);
  const std::int64_t batches = get_or<std::int64_t>(cfg, "batches", 20);
  const double expected = cfg.contains("expected") ? cfg.at("expected").get<double>() : compute_v0(base.env).v0;
  const double tol = get_required<double>(cfg, "tolerance", "speed");
  const std::uint64_t seed = seed_of(cfg, opt);
  const std::int64_t n = replicates_of(cfg, opt, 10);
  const auto estimates = run_replicates(n, opt.jobs, [&](std::int64_t r) {
    SimulationConfig c = base;
    c.seed = replicate_seed(seed, r);
    return speed(x1_path(run(c)), burn, batches);
  });
  json reps = json::array();
  double mean = 0.0;
  for (const auto& e : estimates) {
    reps.push_back({{"speed", e.value}, {"standard_error", e.standard_error}, {"batches", e.batches}});
    mean += e.value / double(n);
  }
  CommandResult out;
  out.pass = std::abs(mean - expected) <= tol;
  out.report = {{"expected", expected}, {"tolerance", tol}, {"mean_speed", mean},
                {"replicates", reps},   {"seed", seed},     {"pass", out.pass}};
  return out;
}

inline CommandResult cmd_scaling(const json& cfg, const Options& opt) {
  check_keys(cfg,
             {"env", "initial", "t_min", "t_max", "replicates", "seed", "slope_range", "ratio_range", "frontier_cap"},
             "scaling");
  json sim = cfg;
  sim.erase("t_min");
  sim.erase("t_max");
  sim.erase("slope_range");
  sim.erase("ratio_range");
  sim["horizon"] = get_required<double>(cfg, "t_max", "scaling");
  SimulationConfig base = simulation_config(sim, "scaling");
  base.window = 1;
  base.histograms = false;
  base.snapshot_times = dyadic_times(get_required<double>(cfg, "t_min", "scaling"), base.horizon);
  const auto slope_range = get_or<std::vector<double>>(cfg, "slope_range", {0.35, 0.65});
  const auto ratio_range = get_or<std::vector<double>>(cfg, "ratio_range", {0.3, 0.75});
  if (slope_range.size() != 2 || ratio_range.size() != 2) throw ConfigError("scaling: ranges must be [lo, hi]");
  const std::uint64_t seed = seed_of(cfg, opt);
  const std::int64_t n = replicates_of(cfg, opt, 20);
  const auto runs = run_replicates(n, opt.jobs, [&](std::int64_t r) {
    SimulationConfig c = base;
    c.seed = replicate_seed(seed, r);
    return run(c);
  });
  json reps = json::array();
  std::vector<double> slopes;
  bool ratios_ok = true;
  std::ostringstream csv;
  csv.imbue(std::locale::classic());
  csv << "replicate,t,x1\n";
  for (std::int64_t r = 0; r < n; ++r) {
    const auto path = x1_path(runs[std::size_t(r)]);
    for (const auto& p : path) csv << r << "," << format_double(p.t) << "," << std::int64_t(p.x) << "\n";
    const auto fit = scaling_exponent(path);
    const double x_end = -path.back().x;
    const double terminal = x_end > 0 ? std::log(x_end) / std::log(path.back().t) : -kInf;
    ratios_ok = ratios_ok && terminal >= ratio_range[0] && terminal <= ratio_range[1];
    slopes.push_back(fit.slope);
    reps.push_back({{"slope", fit.slope},
                    {"standard_error", fit.standard_error},
                    {"terminal_ratio", number(terminal)},
                    {"min_ratio", fit.min_ratio},
                    {"max_ratio", fit.max_ratio},
                    {"dropped", fit.dropped}});
  }
  const double med = median(slopes);
  CommandResult out;
  out.pass = ratios_ok && med >= slope_range[0] && med <= slope_range[1];
  out.report = {{"median_slope", med}, {"slope_range", slope_range}, {"ratio_range", ratio_range},
                {"terminal_ratios_in_range", ratios_ok}, {"replicates", reps}, {"seed", seed}, {"pass", out.pass}};
  out.files.push_back({"scaling.csv", csv.str()});
  return out;
}

inline CommandResult dispatch(const std::string& sub, const json& cfg, const Options& opt) {
  if (sub == "traffic") return cmd_traffic(cfg, opt);
  if (sub == "classify") return cmd_classify(cfg, opt);
  if (sub == "simulate") return cmd_simulate(cfg, opt);
  if (sub == "couple") return cmd_couple(cfg, opt);
  if (sub == "oracle") return cmd_oracle(cfg, opt);
  if (sub == "converge") return cmd_converge(cfg, opt);
  if (sub == "speed") return cmd_speed(cfg, opt);
  if (sub == "scaling") return cmd_scaling(cfg, opt);
  throw ConfigError("unknown subcommand \"" + sub + "\"");
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

/// Runs one subcommand and writes its outputs. Returns the process exit code.
inline int execute(const Options& opt, std::ostream& err = std::cerr) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if (!subcommands().count(opt.subcommand)) throw ConfigError("unknown subcommand \"" + opt.subcommand + "\"");
    std::ifstream in(opt.config_path);
    if (!in) throw ConfigError("cannot read config " + opt.config_path);
    json cfg;
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (opt.seed) cfg["seed"] = *opt.seed;
    if (opt.replicates) cfg["replicates"] = *opt.replicates;

    CommandResult result;
    try {
      result = dispatch(opt.subcommand, cfg, opt);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }

    const std::filesystem::path dir = opt.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(opt.out_dir);
    std::filesystem::create_directories(dir);
    json outputs = json::array({opt.subcommand + ".json"});
    write_file(dir / (opt.subcommand + ".json"), result.report.dump(2) + "\n");
    for (const auto& f : result.files) {
      write_file(dir / f.name, f.content);
      outputs.push_back(f.name);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json manifest = {{"subcommand", opt.subcommand},
                           {"config", cfg},
                           {"seed", get_or<std::uint64_t>(cfg, "seed", 0)},
                           {"jobs", opt.jobs},
                           {"version", EXCLOUD_VERSION},
                           {"wall_time_seconds", wall},
                           {"outputs", outputs},
                           {"pass", result.pass}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return result.pass ? 0 : 2;
  } catch (const std::exception& e) {
    err << "excloud " << opt.subcommand << ": " << e.what() << "\n";
    return 1;
  }
}

inline int main(int argc, char** argv) {
  CLI::App app{"Exclusion-process cloud simulator and traffic-equation toolkit"};
  Options opt;
  std::uint64_t seed = 0;
  std::int64_t replicates = 0;
  app.add_option("subcommand", opt.subcommand, "traffic | classify | simulate | couple | oracle | converge | speed | scaling")
      ->required();
  app.add_option("--config", opt.config_path, "JSON experiment config")->required();
  auto* seed_opt = app.add_option("--seed", seed, "64-bit seed, overrides the config");
  if (const char* env_out = std::getenv("EXCLOUD_OUT")) opt.out_dir = env_out;
  app.add_option("--out", opt.out_dir, "output directory (default: $EXCLOUD_OUT or .)");
  auto* rep_opt = app.add_option("--replicates", replicates, "replicate count, overrides the config");
  app.add_option("--jobs", opt.jobs, "worker threads for replicates")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (seed_opt->count()) opt.seed = seed;
  if (rep_opt->count()) opt.replicates = replicates;
  return execute(opt);
}

}  // namespace excloud::cli
