#pragma once

// Estimators used to compare simulation output with product-geometric laws,
// speeds and growth exponents.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "excloud/error.hpp"
#include "excloud/histogram.hpp"

namespace excloud {

/// P(Geo = m) = (1 - rho) rho^m.
inline double geometric_pmf(double rho, std::int64_t m) {
  if (rho == 0.0) return m == 0 ? 1.0 : 0.0;
  return (1.0 - rho) * std::pow(rho, double(m));
}

/// Total variation between an empirical law on {0..size-1} and Geo(1 - rho),
/// with the geometric tail beyond the support added exactly.
inline double tv_to_geometric(const std::vector<double>& probs, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("tv_to_geometric: rho must lie in [0, 1)");
  double sum = 0.0;
  for (std::size_t m = 0; m < probs.size(); ++m) sum += std::abs(probs[m] - geometric_pmf(rho, std::int64_t(m)));
  sum += std::pow(rho, double(probs.size()));
  return 0.5 * sum;
}

inline double tv_to_geometric(const MarginalHistogram& hist, double rho) {
  if (!(hist.total_time > 0.0)) throw ConfigError("tv_to_geometric: empty histogram");
  std::vector<double> probs(hist.weights.size());
  for (std::size_t m = 0; m < probs.size(); ++m) probs[m] = hist.weights[m] / hist.total_time;
  return tv_to_geometric(probs, rho);
}

/// Empirical law of integer samples.
inline std::vector<double> empirical_law(const std::vector<std::int64_t>& samples) {
  std::int64_t top = 0;
  for (auto s : samples) top = std::max(top, s);
  std::vector<double> p(static_cast<std::size_t>(top) + 1, 0.0);
  for (auto s : samples) p[std::size_t(s)] += 1.0;
  for (auto& x : p) x /= double(samples.size());
  return p;
}

/// Joint total variation between the empirical law of sample vectors and the
/// product law of Geo(1 - rho_k): half of the summed differences on the observed
/// support plus the product mass outside it.
inline double joint_tv_to_product_geometric(const std::vector<std::vector<std::int64_t>>& samples,
                                            const std::vector<double>& rho) {
  if (samples.empty()) throw ConfigError("joint TV: no samples");
  std::map<std::vector<std::int64_t>, double> freq;
  for (const auto& s : samples) {
    if (s.size() != rho.size()) throw ConfigError("joint TV: sample length differs from rho length");
    freq[s] += 1.0 / double(samples.size());
  }
  double diff = 0.0, covered = 0.0;
  for (const auto& [x, p] : freq) {
    double q = 1.0;
    for (std::size_t k = 0; k < rho.size(); ++k) q *= geometric_pmf(rho[k], x[k]);
    diff += std::abs(p - q);
    covered += q;
  }
  return 0.5 * (diff + std::max(0.0, 1.0 - covered));
}

struct TimePoint {
  double t = 0.0;
  double x = 0.0;
};

struct SpeedEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::int64_t batches = 0;
};

/// Slope (x(T) - x(burn_in)) / (T - burn_in) with a batch-means standard error.
/// Samples must be sorted by time; batch boundaries are placed on sample times.
inline SpeedEstimate speed(const std::vector<TimePoint>& path, double burn_in, std::int64_t batches = 20) {
  if (batches < 10) throw ConfigError("speed: at least 10 batches are required");
  std::vector<TimePoint> used;
  for (const auto& p : path)
    if (p.t >= burn_in) used.push_back(p);
  if (std::int64_t(used.size()) < batches + 1) throw ConfigError("speed: insufficient samples after burn-in");
  const std::size_t per = (used.size() - 1) / std::size_t(batches);
  SpeedEstimate est;
  est.batches = batches;
  const TimePoint first = used.front();
  const TimePoint last = used.back();
  est.value = (last.x - first.x) / (last.t - first.t);
  std::vector<double> slopes;
  for (std::int64_t b = 0; b < batches; ++b) {
    const auto& p0 = used[std::size_t(b) * per];
    const auto& p1 = used[std::size_t(b + 1) * per];
    slopes.push_back((p1.x - p0.x) / (p1.t - p0.t));
  }
  const double mean = std::accumulate(slopes.begin(), slopes.end(), 0.0) / double(batches);
  double var = 0.0;
  for (double s : slopes) var += (s - mean) * (s - mean);
  var /= double(batches - 1);
  est.standard_error = std::sqrt(var / double(batches));
  return est;
}

struct ScalingFit {
  double slope = 0.0;
  double standard_error = 0.0;
  double min_ratio = 0.0;  // min over samples of log(-x) / log t
  double max_ratio = 0.0;
  std::int64_t used = 0;
  std::int64_t dropped = 0;  // samples with -x <= 0
};

/// Least-squares slope of log(-x) against log t.
inline ScalingFit scaling_exponent(const std::vector<TimePoint>& path) {
  std::vector<double> lx, ly;
  ScalingFit fit;
  fit.min_ratio = std::numeric_limits<double>::infinity();
  fit.max_ratio = -std::numeric_limits<double>::infinity();
  for (const auto& p : path) {
    if (!(p.t > 1.0) || !(-p.x > 0.0)) {
      ++fit.dropped;
      continue;
    }
    lx.push_back(std::log(p.t));
    ly.push_back(std::log(-p.x));
    const double r = ly.back() / lx.back();
    fit.min_ratio = std::min(fit.min_ratio, r);
    fit.max_ratio = std::max(fit.max_ratio, r);
  }
  fit.used = std::int64_t(lx.size());
  if (fit.used < 2) throw ConfigError("scaling_exponent: fewer than two usable samples");
  const double n = double(fit.used);
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  if (fit.used > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double e = ly[i] - my - fit.slope * (lx[i] - mx);
      rss += e * e;
    }
    fit.standard_error = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return fit;
}

/// t_min, 2 t_min, 4 t_min, ... below t_max, followed by t_max.
inline std::vector<double> dyadic_times(double t_min, double t_max) {
  if (!(t_min > 0.0) || !(t_max >= t_min)) throw ConfigError("dyadic_times: need 0 < t_min <= t_max");
  std::vector<double> out;
  for (double t = t_min; t < t_max; t *= 2.0) out.push_back(t);
  out.push_back(t_max);
  return out;
}

/// Fraction of [path.front().t, path.back().t] during which the piecewise
/// constant path x sits in `sites`.
inline double occupation_fraction(const std::vector<TimePoint>& path, const std::set<std::int64_t>& sites) {
  if (path.size() < 2 || !(path.back().t > path.front().t)) throw ConfigError("occupation_fraction: empty window");
  double inside = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    if (sites.count(std::int64_t(std::llround(path[i].x)))) inside += path[i + 1].t - path[i].t;
  return inside / (path.back().t - path.front().t);
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw ConfigError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace excloud
