// Acceptance suite: one PASS/FAIL line per criterion. Run sizes and
// tolerances come from configs/acceptance.json.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "excloud/cli.hpp"
#include "excloud/coupling.hpp"
#include "excloud/engine.hpp"
#include "excloud/json_io.hpp"
#include "excloud/oracle.hpp"
#include "excloud/replicates.hpp"
#include "excloud/stats.hpp"
#include "excloud/traffic.hpp"
#include "excloud/walk.hpp"

#include "../small_configs.hpp"

namespace fs = std::filesystem;
using namespace excloud;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Relative comparison; absolute against an exact zero.
bool close_rel(double got, double want, double tol) {
  return std::abs(got - want) <= tol * (want == 0.0 ? 1.0 : std::abs(want));
}

// 1 --------------------------------------------------------------------------

Outcome traffic_golden(const json& cfg) {
  const double tol = cfg.at("relative_tolerance");
  const std::int64_t K = cfg.at("depth");
  Outcome out;
  std::vector<std::string> failures;
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  auto check_rho = [&](const std::string& name, const RateEnvironment& env, double v,
                       const std::function<double(std::int64_t)>& expected) {
    const auto sol = solve_rho(env, v, K);
    for (std::int64_t k = 1; k <= K; ++k) {
      const double want = expected(k);
      const double got = sol.rho[std::size_t(k - 1)];
      if (!(std::abs(got - want) <= tol * std::abs(want) || (want == 0.0 && got == 0.0))) {
        require(false, name + " rho_" + std::to_string(k) + " at v=" + fmt(v));
        return;
      }
    }
  };

  // homogeneous a < b: v0 = 0, V = [0, b - a), rho_k = (a/b)^k + v (1 - (a/b)^k) / (b - a)
  {
    const double a = 1, b = 2;
    const auto env = envs::homogeneous(a, b);
    const auto set = admissible_set(env);
    require(compute_v0(env).v0 == 0.0, "homogeneous(1,2) v0");
    require(set.v0 == 0.0 && close_rel(set.v1, b - a, tol) && set.right_end == RightEnd::open,
            "homogeneous(1,2) V = [0, 1)");
    for (double v : {0.0, 0.25, 0.5, 0.9})
      check_rho("homogeneous(1,2)", env, v, [&](std::int64_t k) {
        const double q = std::pow(a / b, double(k));
        return q + v * (1 - q) / (b - a);
      });
    const auto lim = solve_rho(env, 0.5, K).tail_limit;
    require(lim && close_rel(*lim, 0.5 / (b - a), tol), "homogeneous(1,2) rho limit v/(b-a)");
    require(classify_vf(env).cls == VfClass::singleton_zero, "homogeneous(1,2) VF = {0}");
  }
  // homogeneous a > b: v0 = b - a, V empty
  {
    const auto env = envs::homogeneous(2, 1);
    require(close_rel(compute_v0(env).v0, -1.0, tol), "homogeneous(2,1) v0 = b - a");
    require(admissible_set(env).empty(), "homogeneous(2,1) V empty");
    check_rho("homogeneous(2,1)", env, -1.0, [](std::int64_t) { return 1.0; });
    require(!solve_rho(env, -1.0, K).admissible, "homogeneous(2,1) v0 solution rejected");
    require(classify_vf(env).cls == VfClass::empty, "homogeneous(2,1) VF empty");
  }
  // dog and sheep: alpha_k = a/b, beta_k = (k-1)/c + 1/b, v0 = 0, V = {0}
  {
    const double a = 0.5, b = 1, c = 1;
    const auto env = envs::dog_sheep(a, b, c);
    const auto set = admissible_set(env);
    require(compute_v0(env).v0 == 0.0, "dog-sheep v0");
    require(set.right_end == RightEnd::singleton && set.v0 == 0.0, "dog-sheep V = {0}");
    check_rho("dog-sheep", env, 0.0, [&](std::int64_t) { return a / b; });
    const auto t = compute_tables(env, K);
    for (std::int64_t k = 1; k <= K; ++k)
      require(close_rel(t.beta(k), double(k - 1) / c + 1 / b, tol), "dog-sheep beta_" + std::to_string(k));
    require(classify_vf(env).cls == VfClass::empty, "dog-sheep VF empty");
  }
  // one sheep, many dogs: v0 = -(a-b)/(1+a-b), rho_k = 1/(1+a-b)
  {
    const double a = 2, b = 1;
    const auto env = envs::one_sheep_many_dogs(a, b);
    const double v0 = -(a - b) / (1 + a - b);
    const auto set = admissible_set(env);
    require(close_rel(compute_v0(env).v0, v0, tol), "one-sheep-many-dogs v0");
    require(set.right_end == RightEnd::singleton && close_rel(set.v0, v0, tol), "one-sheep-many-dogs V = {v0}");
    check_rho("one-sheep-many-dogs", env, v0, [&](std::int64_t) { return 1 / (1 + a - b); });
    require(classify_vf(env).cls == VfClass::empty, "one-sheep-many-dogs VF empty");
  }
  // a_k = a k!, b_k = (k+1)!: alpha_k = a^k/(k+1)!, beta_k/alpha_k = sum_{j<=k} a^{-j}
  for (double a : {0.5, 1.0, 2.0}) {
    const auto env = envs::factorial(a);
    const std::string name = "factorial(" + fmt(a) + ")";
    const double lo = a > 1 ? 1 - a : 0.0, hi = a < 1 ? 2 - a : (a == 1 ? 1.0 : 2 - a);
    const auto set = admissible_set(env);
    require(close_rel(compute_v0(env).v0, lo, tol), name + " v0");
    require(close_rel(set.v0, lo, tol) && close_rel(set.v1, hi, tol) && set.right_end == RightEnd::open,
            name + " V = [" + fmt(lo) + ", " + fmt(hi) + ")");
    for (double w : {0.0, 0.3, 0.7}) {
      const double v = lo + w * (hi - lo);
      check_rho(name, env, v, [&](std::int64_t k) {
        const double alpha = std::exp(double(k) * std::log(a) - std::lgamma(double(k) + 2.0));
        double ratio = 0.0;
        for (std::int64_t j = 1; j <= k; ++j) ratio += std::pow(a, -double(j));
        return alpha * (1 + v * ratio);
      });
    }
    require(classify_vf(env).cls == VfClass::equals_v, name + " VF = V");
  }
  out.pass = failures.empty();
  out.detail = out.pass ? "7 environments, v0 / V / rho_k / VF class within " + fmt(tol) + " relative"
                        : std::to_string(failures.size()) + " mismatches, first: " + failures.front();
  return out;
}

// 2 --------------------------------------------------------------------------

Outcome duality(const json& cfg) {
  const double tol = cfg.at("tolerance");
  std::vector<RateEnvironment> list{envs::homogeneous(1, 2), envs::homogeneous(2, 1), envs::dog_sheep(0.5, 1, 1),
                                    envs::one_sheep_many_dogs(2, 1), envs::factorial(0.5), envs::factorial(1),
                                    envs::factorial(2)};
  Rng rng(cfg.at("seed").get<std::uint64_t>());
  for (int i = 0; i < cfg.at("random_environments").get<int>(); ++i) {
    std::vector<Rates> prefix(std::size_t(1 + rng.bits() % 8));
    for (auto& r : prefix) r = {0.1 + 4.9 * rng.uniform(), 0.1 + 4.9 * rng.uniform()};
    list.emplace_back(prefix, ConstantTail{0.1 + 4.9 * rng.uniform(), 0.1 + 4.9 * rng.uniform()});
  }
  double worst = 0.0;
  for (const auto& env : list)
    worst = std::max(worst, std::abs(std::abs(compute_v0(env).v0) - env.rate_at(1).a * classify(env).p0));
  return {worst <= tol, std::to_string(list.size()) + " environments, max | |v0| - a1 p0 | = " + fmt(worst) +
                            " (<= " + fmt(tol) + ")"};
}

// 3 --------------------------------------------------------------------------

Outcome engine_vs_oracle(const json& cfg) {
  Timer timer;
  const auto env = envs::dog_sheep(0.5, 1, 1);
  const std::int64_t N = cfg.at("queues"), C = cfg.at("cap");
  const double t = cfg.at("t");
  const std::int64_t reps = cfg.at("replicates");
  const std::uint64_t seed = cfg.at("seed");
  const TruncatedChain chain(env, N, C, ChainBoundary::lower);
  const auto exact = transient_distribution(chain, std::vector<std::int64_t>(std::size_t(N), 0), t);

  const std::int64_t blocks = 64;
  const auto partial = run_replicates(blocks, jobs(), [&](std::int64_t b) {
    std::vector<double> counts(std::size_t(chain.size()) + 1, 0.0);  // last slot: beyond the cap
    for (std::int64_t r = b; r < reps; r += blocks) {
      Simulator sim(env, GapState{}, replicate_seed(seed, r), FiniteSystem{N, FiniteBoundary::lower});
      sim.run_until(t);
      if (sim.state().total_customers > C) {
        counts.back() += 1.0;
        continue;
      }
      std::vector<std::int64_t> eta(static_cast<std::size_t>(N));
      for (std::int64_t k = 1; k <= N; ++k) eta[std::size_t(k - 1)] = sim.state().gap(k);
      counts[std::size_t(chain.rank(eta))] += 1.0;
    }
    return counts;
  });
  Eigen::VectorXd emp = Eigen::VectorXd::Zero(chain.size());
  double outside = 0.0;
  for (const auto& c : partial) {
    for (std::int64_t s = 0; s < chain.size(); ++s) emp(s) += c[std::size_t(s)] / double(reps);
    outside += c.back() / double(reps);
  }
  const double tv = total_variation(emp, exact.p) + 0.5 * (outside + exact.truncation_error);
  const double secs = timer.seconds();
  const double tv_max = cfg.at("tv"), sec_max = cfg.at("max_seconds");
  return {tv <= tv_max && secs <= sec_max, std::to_string(reps) + " replicates, TV = " + fmt(tv) + " (<= " +
                                               fmt(tv_max) + "), " + fmt(secs) + " s (<= " + fmt(sec_max) + " s)"};
}

// 4 --------------------------------------------------------------------------

Outcome finite_stationarity(const json& cfg) {
  const RateEnvironment env({{0.5, 1}, {1, 1}, {1, 1}}, NoTail{});
  const std::vector<double> rho{2.0 / 3.0, 5.0 / 6.0};
  SimulationConfig sc{env};
  sc.finite = FiniteSystem{2, FiniteBoundary::closed};
  sc.horizon = cfg.at("horizon");
  sc.burn_in = cfg.at("burn_in").get<double>();
  sc.seed = cfg.at("seed");
  const auto run_out = run(sc);
  double sim_tv = 0.0;
  for (std::size_t k = 0; k < 2; ++k) sim_tv = std::max(sim_tv, tv_to_geometric(run_out.histograms[k], rho[k]));

  const TruncatedChain chain(env, 2, cfg.at("oracle_cap"), ChainBoundary::closed_finite);
  const auto st = stationary(chain);
  double oracle_tv = 0.0;
  for (std::int64_t k = 1; k <= 2; ++k)
    oracle_tv = std::max(oracle_tv, tv_to_geometric(chain.marginal(st.pi, k), rho[std::size_t(k - 1)]));
  oracle_tv = std::max(oracle_tv, total_variation(st.pi, product_form(chain, rho)));

  const double sim_max = cfg.at("tv"), oracle_max = cfg.at("oracle_tv");
  return {sim_tv <= sim_max && oracle_tv <= oracle_max,
          "simulated max per-queue TV = " + fmt(sim_tv) + " (<= " + fmt(sim_max) + "), oracle TV = " + fmt(oracle_tv) +
              " (<= " + fmt(oracle_max) + ")"};
}

// 5 --------------------------------------------------------------------------

Outcome local_convergence(const json& cfg) {
  Timer timer;
  const std::int64_t queues = cfg.at("queues"), reps = cfg.at("replicates");
  const std::uint64_t seed = cfg.at("seed");
  const auto tvs = run_replicates(reps, jobs(), [&](std::int64_t r) {
    SimulationConfig sc{envs::dog_sheep(0.5, 1, 1)};
    sc.horizon = cfg.at("horizon");
    sc.burn_in = cfg.at("burn_in").get<double>();
    sc.window = queues;
    sc.seed = replicate_seed(seed, r);
    const auto out = run(sc);
    std::vector<double> tv;
    for (const auto& h : out.histograms) tv.push_back(tv_to_geometric(h, 0.5));
    return tv;
  });
  double worst = 0.0;
  std::string per;
  for (std::int64_t k = 0; k < queues; ++k) {
    std::vector<double> col;
    for (const auto& row : tvs) col.push_back(row[std::size_t(k)]);
    const double med = median(col);
    worst = std::max(worst, med);
    per += (k ? ", " : "") + fmt(med);
  }
  const double secs = timer.seconds();
  const double tol = cfg.at("tv"), sec_max = cfg.at("max_seconds");
  return {worst <= tol && secs <= sec_max, "median TV per queue [" + per + "] (<= " + fmt(tol) + "), " + fmt(secs) +
                                               " s (<= " + fmt(sec_max) + " s)"};
}

// 6 --------------------------------------------------------------------------

Outcome finite_configuration(const json& cfg) {
  const std::int64_t queues = cfg.at("queues"), reps = cfg.at("replicates");
  const double horizon = cfg.at("horizon");
  const std::uint64_t seed = cfg.at("seed");
  const auto samples = run_replicates(reps, jobs(), [&](std::int64_t r) {
    Simulator sim(envs::homogeneous(1, 2), GapState{}, replicate_seed(seed, r));
    sim.run_until(horizon);
    std::vector<std::int64_t> eta(static_cast<std::size_t>(queues));
    for (std::int64_t k = 1; k <= queues; ++k) eta[std::size_t(k - 1)] = sim.state().gap(k);
    return eta;
  });
  std::vector<double> rho;
  for (std::int64_t k = 1; k <= queues; ++k) rho.push_back(std::pow(0.5, double(k)));
  const double tv = joint_tv_to_product_geometric(samples, rho);
  const double tol = cfg.at("tv");
  return {tv <= tol, std::to_string(reps) + " replicates, joint TV of (eta_1..eta_" + std::to_string(queues) +
                         ") = " + fmt(tv) + " (<= " + fmt(tol) + ")"};
}

// 7 --------------------------------------------------------------------------

Outcome slln(const json& cfg) {
  Timer timer;
  const double horizon = cfg.at("horizon");
  const std::int64_t reps = cfg.at("replicates");
  const std::uint64_t seed = cfg.at("seed");
  bool pass = true;
  std::string detail;
  std::uint64_t case_index = 0;
  for (const auto& c : cfg.at("cases")) {
    const std::string name = c.at("name");
    const RateEnvironment env = name == "one_sheep_many_dogs" ? envs::one_sheep_many_dogs(2, 1)
                                : name == "homogeneous_1_2"   ? envs::homogeneous(1, 2)
                                                              : envs::dog_sheep(0.5, 1, 1);
    const auto speeds = run_replicates(reps, jobs(), [&](std::int64_t r) {
      Simulator sim(env, GapState{}, replicate_seed(stream_seed(seed, case_index), r));
      std::vector<TimePoint> path{{0.0, 0.0}};
      for (int i = 1; i <= 1000; ++i) {
        sim.run_until(horizon * i / 1000.0);
        path.push_back({sim.state().clock, double(sim.state().x1)});
      }
      return speed(path, 0.1 * horizon).value;
    });
    double mean = 0.0, spread = 0.0;
    for (double v : speeds) mean += v / double(reps);
    for (double v : speeds) spread = std::max(spread, std::abs(v - mean));
    const double want = c.at("expected"), tol = c.at("tolerance");
    const bool ok = std::abs(mean - want) <= tol;
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + name + " " + fmt(mean) + " (target " + fmt(want) + " +/- " + fmt(tol) +
              ", replicate spread " + fmt(spread) + ")";
    ++case_index;
  }
  const double secs = timer.seconds(), sec_max = cfg.at("max_seconds");
  return {pass && secs <= sec_max, detail + ", " + fmt(secs) + " s (<= " + fmt(sec_max) + " s)"};
}

// 8 and 9 --------------------------------------------------------------------

struct DogPaths {
  std::vector<std::vector<TimePoint>> paths;  // X_1 at the union of requested times
  double seconds = 0.0;
};

DogPaths dog_paths(const json& escape, const json& exponent) {
  Timer timer;
  std::vector<double> times = dyadic_times(exponent.at("t_min"), exponent.at("t_max"));
  for (double t : escape.at("times")) times.push_back(t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const std::int64_t reps = std::max(escape.at("replicates").get<std::int64_t>(), exponent.at("replicates").get<std::int64_t>());
  const std::uint64_t seed = escape.at("seed");
  DogPaths out;
  out.paths = run_replicates(reps, jobs(), [&](std::int64_t r) {
    Simulator sim(envs::dog_sheep(0.5, 1, 1), GapState{}, replicate_seed(seed, r));
    std::vector<TimePoint> path;
    for (double t : times) {
      sim.run_until(t);
      path.push_back({t, double(sim.state().x1)});
    }
    return path;
  });
  out.seconds = timer.seconds();
  return out;
}

double x1_at(const std::vector<TimePoint>& path, double t) {
  for (const auto& p : path)
    if (p.t == t) return p.x;
  throw std::logic_error("time not recorded");
}

Outcome dog_escape(const json& cfg, const DogPaths& dp) {
  const std::int64_t reps = cfg.at("replicates");
  const double level = cfg.at("level"), final_min = cfg.at("final_fraction");
  std::vector<double> fractions;
  for (double t : cfg.at("times")) {
    double f = 0.0;
    for (std::int64_t r = 0; r < reps; ++r)
      if (x1_at(dp.paths[std::size_t(r)], t) < level) f += 1.0 / double(reps);
    fractions.push_back(f);
  }
  const bool monotone = std::is_sorted(fractions.begin(), fractions.end());
  std::string list;
  for (double f : fractions) list += (list.empty() ? "" : ", ") + fmt(f);
  return {monotone && fractions.back() > final_min,
          "fraction with X1 < " + fmt(level) + ": [" + list + "], nondecreasing = " + (monotone ? "yes" : "no") +
              ", final > " + fmt(final_min)};
}

Outcome dog_exponent(const json& cfg, const DogPaths& dp) {
  const std::int64_t reps = cfg.at("replicates");
  const auto slope_range = cfg.at("slope_range").get<std::vector<double>>();
  const auto ratio_range = cfg.at("ratio_range").get<std::vector<double>>();
  const double t_max = cfg.at("t_max");
  const auto dyadic = dyadic_times(cfg.at("t_min"), t_max);
  std::vector<double> slopes;
  double min_ratio = 1e300, max_ratio = -1e300;
  bool ratios_ok = true;
  for (std::int64_t r = 0; r < reps; ++r) {
    std::vector<TimePoint> pts;
    for (double t : dyadic) pts.push_back({t, x1_at(dp.paths[std::size_t(r)], t)});
    try {
      slopes.push_back(scaling_exponent(pts).slope);
    } catch (const ConfigError&) {
      slopes.push_back(0.0);  // never repelled: counts as slope 0
    }
    const double x = -x1_at(dp.paths[std::size_t(r)], t_max);
    const double ratio = x > 0 ? std::log(x) / std::log(t_max) : -1e300;
    min_ratio = std::min(min_ratio, ratio);
    max_ratio = std::max(max_ratio, ratio);
    ratios_ok = ratios_ok && ratio >= ratio_range[0] && ratio <= ratio_range[1];
  }
  const double med = median(slopes);
  const double sec_max = cfg.at("max_seconds");
  return {ratios_ok && med >= slope_range[0] && med <= slope_range[1] && dp.seconds <= sec_max,
          "median slope " + fmt(med) + " in [" + fmt(slope_range[0]) + ", " + fmt(slope_range[1]) +
              "], terminal ratios in [" + fmt(min_ratio) + ", " + fmt(max_ratio) + "] (range [" + fmt(ratio_range[0]) +
              ", " + fmt(ratio_range[1]) + "]), shared runs " + fmt(dp.seconds) + " s (<= " + fmt(sec_max) + " s)"};
}

// 10 -------------------------------------------------------------------------

Outcome coupling_suites(const json& cfg) {
  const std::vector<RateEnvironment> goldens{envs::homogeneous(1, 2), envs::homogeneous(2, 1), envs::dog_sheep(0.5, 1, 1),
                                             envs::one_sheep_many_dogs(2, 1)};
  const std::uint64_t seed = cfg.at("seed");
  const std::size_t min_arrows = cfg.at("min_arrows");
  std::size_t sandwich_runs = 0, violations = 0, fewest = SIZE_MAX;
  std::uint64_t stream = 0;
  for (const auto& env : goldens) {
    for (std::int64_t N : cfg.at("queues")) {
      const auto field = build_field(env, cfg.at("window"), cfg.at("cap"), stream_seed(seed, stream++));
      const auto rep = sandwich_run(GapState::from_gaps({{1, 2}, {3, 1}}), field, N);
      violations += rep.violations.size();
      fewest = std::min(fewest, rep.arrows);
      ++sandwich_runs;
    }
  }
  Rng rng(seed, 1 << 20);
  std::size_t pair_violations = 0, mismatches = 0, pair_arrows = 0;
  const int pairs = cfg.at("pairs");
  for (int i = 0; i < pairs; ++i) {
    std::map<std::int64_t, std::int64_t> lo, hi;
    for (std::int64_t k = 1; k <= 12; ++k) {
      const auto l = std::int64_t(rng.bits() % 4);
      if (l) lo[k] = l;
      const auto extra = std::int64_t(rng.bits() % 3);
      if (l + extra) hi[k] = l + extra;
    }
    const std::int64_t x1 = std::int64_t(rng.bits() % 11) - 5;
    const auto field =
        build_field(goldens[std::size_t(i) % goldens.size()], cfg.at("pair_window"), cfg.at("pair_cap"), stream_seed(seed, stream++));
    const auto rep = two_class_run(GapState::from_gaps(lo, x1), GapState::from_gaps(hi, x1), field);
    pair_violations += rep.violations.size();
    mismatches += rep.projection_mismatches + rep.first_class_mismatches;
    pair_arrows += rep.arrows;
  }
  const bool pass = violations == 0 && fewest >= min_arrows && pair_violations == 0 && mismatches == 0;
  return {pass, std::to_string(sandwich_runs) + " sandwich runs (fewest arrows " + std::to_string(fewest) +
                    ", >= " + std::to_string(min_arrows) + "), " + std::to_string(violations) + " ordering violations; " +
                    std::to_string(pairs) + " two-class pairs over " + std::to_string(pair_arrows) + " arrows, " +
                    std::to_string(pair_violations) + " violations, " + std::to_string(mismatches) +
                    " projection mismatches"};
}

// 11 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "excloud_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::string> differing;
  std::size_t files = 0;
  for (const auto& [sub, cfg] : excloud::testing::small_configs()) {
    const fs::path dir = root / sub;
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << cfg.dump(2);
    for (const char* leg : {"a", "b"}) {
      cli::Options opt;
      opt.subcommand = sub;
      opt.config_path = (dir / "config.json").string();
      opt.out_dir = (dir / leg).string();
      opt.jobs = jobs();
      std::ostringstream err;
      if (cli::execute(opt, err) == 1) differing.push_back(sub + " (failed: " + err.str() + ")");
    }
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
      const auto name = entry.path().filename();
      if (name == "manifest.json") continue;
      ++files;
      if (slurp(entry.path()) != slurp(dir / "b" / name)) differing.push_back(sub + "/" + name.string());
    }
  }
  fs::remove_all(root);
  return {differing.empty(), std::to_string(files) + " primary outputs over 8 subcommands compared byte for byte" +
                                 (differing.empty() ? "" : ", differing: " + differing.front())};
}

}  // namespace

int main() {
  std::ifstream in(std::string(EXCLOUD_SOURCE_DIR) + "/configs/acceptance.json");
  if (!in) {
    std::cerr << "cannot read configs/acceptance.json\n";
    return 1;
  }
  const json cfg = json::parse(in);
  int failed = 0;
  auto report = [&](int id, const std::function<Outcome()>& body) {
    Timer timer;
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << " [" << fmt(timer.seconds())
              << " s]" << std::endl;
  };
  report(1, [&] { return traffic_golden(cfg.at("traffic_golden")); });
  report(2, [&] { return duality(cfg.at("duality")); });
  report(3, [&] { return engine_vs_oracle(cfg.at("engine_vs_oracle")); });
  report(4, [&] { return finite_stationarity(cfg.at("finite_stationarity")); });
  report(5, [&] { return local_convergence(cfg.at("local_convergence")); });
  report(6, [&] { return finite_configuration(cfg.at("finite_configuration")); });
  report(7, [&] { return slln(cfg.at("slln")); });
  DogPaths dp;
  try {
    dp = dog_paths(cfg.at("dog_escape"), cfg.at("dog_exponent"));
  } catch (const std::exception& e) {
    std::cout << "dog runs failed: " << e.what() << std::endl;
  }
  report(8, [&] { return dog_escape(cfg.at("dog_escape"), dp); });
  report(9, [&] { return dog_exponent(cfg.at("dog_exponent"), dp); });
  report(10, [&] { return coupling_suites(cfg.at("coupling")); });
  report(11, [&] { return determinism(); });
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
