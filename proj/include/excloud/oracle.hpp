#pragma once

// Brute-force solvers for small truncated networks: N queues, at most C
// customers in total. Transitions that would push the total above C are
// blocked. States are indexed by a ranked encoding of bounded-sum
// compositions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "excloud/error.hpp"
#include "excloud/rates.hpp"

namespace excloud {

enum class ChainBoundary { lower, closed_finite };

inline const char* to_string(ChainBoundary b) {
  return b == ChainBoundary::lower ? "lower" : "closed_finite";
}

inline constexpr std::int64_t kMaxChainStates = 100'000;
inline constexpr std::int64_t kDenseSolveLimit = 2'000;

class TruncatedChain {
 public:
  TruncatedChain(const RateEnvironment& env, std::int64_t queues, std::int64_t cap, ChainBoundary boundary)
      : N_(queues), C_(cap), boundary_(boundary) {
    if (N_ < 1) throw ConfigError("oracle: need at least one queue");
    if (C_ < 0) throw ConfigError("oracle: customer cap must be >= 0");
    if (N_ + 1 > env.max_index()) throw IndexError("oracle: rates needed up to index N+1");
    a_.assign(std::size_t(N_) + 2, 0.0);
    b_.assign(std::size_t(N_) + 2, 0.0);
    for (std::int64_t k = 1; k <= N_ + 1; ++k) {
      const auto r = env.rate_at(k);
      a_[std::size_t(k)] = r.a;
      b_[std::size_t(k)] = r.b;
    }
    if (boundary_ == ChainBoundary::lower) b_[std::size_t(N_) + 1] = 0.0;

    // counts_[n][s]: vectors of length n with sum <= s, i.e. binomial(n + s, n)
    counts_.assign(std::size_t(N_) + 1, std::vector<double>(std::size_t(C_) + 1, 1.0));
    for (std::int64_t n = 1; n <= N_; ++n)
      for (std::int64_t s = 1; s <= C_; ++s)
        counts_[std::size_t(n)][std::size_t(s)] =
            counts_[std::size_t(n - 1)][std::size_t(s)] + counts_[std::size_t(n)][std::size_t(s - 1)];
    const double states = counts_[std::size_t(N_)][std::size_t(C_)];
    if (states > double(kMaxChainStates))
      throw ConfigError("oracle: " + std::to_string(std::int64_t(states)) + " states exceed the limit of " +
                        std::to_string(kMaxChainStates));
    size_ = std::int64_t(states);
    build_generator();
  }

  std::int64_t queues() const { return N_; }
  std::int64_t cap() const { return C_; }
  ChainBoundary boundary() const { return boundary_; }
  std::int64_t size() const { return size_; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& generator() const { return Q_; }
  double max_exit_rate() const { return max_exit_; }

  std::int64_t rank(const std::vector<std::int64_t>& eta) const {
    if (std::int64_t(eta.size()) != N_) throw ConfigError("oracle: state length must equal N");
    std::int64_t r = 0, rem = C_;
    for (std::int64_t i = 0; i < N_; ++i) {
      const std::int64_t v = eta[std::size_t(i)];
      if (v < 0 || v > rem) throw ConfigError("oracle: state outside the truncation");
      for (std::int64_t x = 0; x < v; ++x) r += std::int64_t(counts_[std::size_t(N_ - 1 - i)][std::size_t(rem - x)]);
      rem -= v;
    }
    return r;
  }

  std::vector<std::int64_t> unrank(std::int64_t r) const {
    std::vector<std::int64_t> eta(static_cast<std::size_t>(N_), 0);
    std::int64_t rem = C_;
    for (std::int64_t i = 0; i < N_; ++i) {
      std::int64_t v = 0;
      while (true) {
        const auto block = std::int64_t(counts_[std::size_t(N_ - 1 - i)][std::size_t(rem - v)]);
        if (r < block) break;
        r -= block;
        ++v;
      }
      eta[std::size_t(i)] = v;
      rem -= v;
    }
    return eta;
  }

  /// Marginal law of queue k (1-based) under a distribution over states.
  std::vector<double> marginal(const Eigen::VectorXd& p, std::int64_t k) const {
    std::vector<double> out(static_cast<std::size_t>(C_) + 1, 0.0);
    for (std::int64_t s = 0; s < size_; ++s) out[std::size_t(states_[std::size_t(s)][std::size_t(k - 1)])] += p(s);
    return out;
  }

  /// Probability mass on states with exactly C customers.
  double boundary_mass(const Eigen::VectorXd& p) const {
    double m = 0.0;
    for (std::int64_t s = 0; s < size_; ++s)
      if (totals_[std::size_t(s)] == C_) m += p(s);
    return m;
  }

  const std::vector<std::int64_t>& state(std::int64_t r) const { return states_[std::size_t(r)]; }

 private:
  void build_generator() {
    states_.resize(std::size_t(size_));
    totals_.resize(std::size_t(size_));
    for (std::int64_t r = 0; r < size_; ++r) {
      states_[std::size_t(r)] = unrank(r);
      std::int64_t t = 0;
      for (auto v : states_[std::size_t(r)]) t += v;
      totals_[std::size_t(r)] = t;
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(size_) * std::size_t(2 * N_ + 3));
    max_exit_ = 0.0;
    for (std::int64_t r = 0; r < size_; ++r) {
      auto eta = states_[std::size_t(r)];
      const bool room = totals_[std::size_t(r)] < C_;
      double out = 0.0;
      auto emit = [&](double rate) {
        if (rate <= 0.0) return;
        trip.emplace_back(r, rank(eta), rate);
        out += rate;
      };
      if (room) {
        eta[0] += 1;
        emit(a_[1]);
        eta[0] -= 1;
        if (b_[std::size_t(N_) + 1] > 0.0) {
          eta[std::size_t(N_ - 1)] += 1;
          emit(b_[std::size_t(N_) + 1]);
          eta[std::size_t(N_ - 1)] -= 1;
        }
      }
      for (std::int64_t k = 1; k <= N_; ++k) {
        auto& q = eta[std::size_t(k - 1)];
        if (q == 0) continue;
        q -= 1;
        if (k > 1) eta[std::size_t(k - 2)] += 1;
        emit(b_[std::size_t(k)]);
        if (k > 1) eta[std::size_t(k - 2)] -= 1;
        if (k < N_) eta[std::size_t(k)] += 1;
        emit(a_[std::size_t(k + 1)]);
        if (k < N_) eta[std::size_t(k)] -= 1;
        q += 1;
      }
      trip.emplace_back(r, r, -out);
      max_exit_ = std::max(max_exit_, out);
    }
    Q_.resize(size_, size_);
    Q_.setFromTriplets(trip.begin(), trip.end());
    Q_.makeCompressed();
  }

  std::int64_t N_, C_;
  ChainBoundary boundary_;
  std::vector<double> a_, b_;
  std::vector<std::vector<double>> counts_;
  std::int64_t size_ = 0;
  std::vector<std::vector<std::int64_t>> states_;
  std::vector<std::int64_t> totals_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> Q_;
  double max_exit_ = 0.0;
};

struct StationaryResult {
  Eigen::VectorXd pi;
  double residual = 0.0;       // max |(pi Q)_j|
  double boundary_mass = 0.0;  // mass on states with C customers
};

/// Solves pi Q = 0, sum pi = 1. Throws CapError when the mass on the cap
/// exceeds `max_boundary_mass`.
inline StationaryResult stationary(const TruncatedChain& chain, double max_boundary_mass = 1e-6) {
  const std::int64_t n = chain.size();
  const Eigen::SparseMatrix<double> Qt = Eigen::SparseMatrix<double>(chain.generator().transpose());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  StationaryResult out;
  if (n <= kDenseSolveLimit) {
    Eigen::MatrixXd A = Eigen::MatrixXd(Qt);
    A.row(n - 1).setOnes();
    out.pi = A.partialPivLu().solve(rhs);
  } else {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(Qt.nonZeros()) + std::size_t(n));
    for (int col = 0; col < Qt.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(Qt, col); it; ++it)
        if (it.row() != n - 1) trip.emplace_back(it.row(), it.col(), it.value());
    for (std::int64_t j = 0; j < n; ++j) trip.emplace_back(n - 1, j, 1.0);
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw CapError("oracle: stationary solve failed (chain not irreducible?)");
    out.pi = lu.solve(rhs);
  }
  for (std::int64_t j = 0; j < n; ++j) out.pi(j) = std::max(out.pi(j), 0.0);
  out.pi /= out.pi.sum();
  const Eigen::VectorXd r = Qt * out.pi;
  out.residual = r.cwiseAbs().maxCoeff();
  out.boundary_mass = chain.boundary_mass(out.pi);
  if (out.boundary_mass > max_boundary_mass)
    throw CapError("oracle: mass " + std::to_string(out.boundary_mass) + " on the customer cap exceeds " +
                   std::to_string(max_boundary_mass));
  return out;
}

struct TransientResult {
  Eigen::VectorXd p;
  double truncation_error = 0.0;  // Poisson mass not summed
  std::int64_t terms = 0;
  double boundary_mass = 0.0;
};

/// Distribution at time t from a fixed state, by uniformization.
inline TransientResult transient_distribution(const TruncatedChain& chain, const std::vector<std::int64_t>& initial,
                                              double t, double tol = 1e-11) {
  if (!(t >= 0.0)) throw ConfigError("oracle: time must be >= 0");
  const std::int64_t n = chain.size();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v(chain.rank(initial)) = 1.0;
  TransientResult out;
  const double lambda = chain.max_exit_rate();
  if (t == 0.0 || lambda == 0.0) {
    out.p = v;
    out.terms = 1;
    out.boundary_mass = chain.boundary_mass(out.p);
    return out;
  }
  // uniformized kernel P = I + Q / lambda, applied as v <- v P
  const Eigen::SparseMatrix<double> Pt = [&] {
    Eigen::SparseMatrix<double> id(n, n);
    id.setIdentity();
    return Eigen::SparseMatrix<double>(id + Eigen::SparseMatrix<double>(chain.generator().transpose()) / lambda);
  }();
  const double lt = lambda * t;
  out.p = Eigen::VectorXd::Zero(n);
  double summed = 0.0;
  for (std::int64_t m = 0;; ++m) {
    const double w = std::exp(-lt + double(m) * std::log(lt) - std::lgamma(double(m) + 1.0));
    out.p += w * v;
    summed += w;
    out.terms = m + 1;
    if (double(m) > lt && 1.0 - summed < tol) break;
    if (m > 100 + std::int64_t(10.0 * lt + 50.0 * std::sqrt(lt))) break;
    v = Pt * v;
  }
  out.truncation_error = std::max(0.0, 1.0 - summed);
  out.boundary_mass = chain.boundary_mass(out.p);
  return out;
}

/// Product-geometric law over the chain's states, conditioned on at most C customers.
inline Eigen::VectorXd product_form(const TruncatedChain& chain, const std::vector<double>& rho) {
  if (std::int64_t(rho.size()) != chain.queues()) throw ConfigError("product_form: need one rho per queue");
  Eigen::VectorXd p(chain.size());
  for (std::int64_t s = 0; s < chain.size(); ++s) {
    double lp = 0.0;
    for (std::int64_t k = 0; k < chain.queues(); ++k)
      lp += std::log1p(-rho[std::size_t(k)]) + double(chain.state(s)[std::size_t(k)]) * std::log(rho[std::size_t(k)]);
    p(s) = std::exp(lp);
  }
  return p / p.sum();
}

inline double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace excloud
