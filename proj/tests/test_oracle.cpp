#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "excloud/oracle.hpp"
#include "excloud/stats.hpp"
#include "excloud/traffic.hpp"

using namespace excloud;

namespace {

const RateEnvironment kDogTwoSheep = envs::dog_sheep(0.5, 1, 1);

}  // namespace

TEST(Chain, StateCountAndRankRoundTrip) {
  const TruncatedChain chain(kDogTwoSheep, 4, 12, ChainBoundary::lower);
  EXPECT_EQ(chain.size(), 1820);  // binomial(16, 4)
  for (std::int64_t r = 0; r < chain.size(); ++r) {
    const auto eta = chain.unrank(r);
    EXPECT_EQ(chain.rank(eta), r);
    EXPECT_EQ(chain.state(r), eta);
  }
  EXPECT_THROW(chain.rank({13, 0, 0, 0}), ConfigError);
  EXPECT_THROW(chain.rank({0, 0, 0}), ConfigError);
  EXPECT_THROW(TruncatedChain(kDogTwoSheep, 30, 30, ChainBoundary::lower), ConfigError);
}

TEST(Chain, GeneratorRowsSumToZero) {
  for (auto b : {ChainBoundary::lower, ChainBoundary::closed_finite}) {
    const TruncatedChain chain(kDogTwoSheep, 3, 10, b);
    const auto& Q = chain.generator();
    for (int r = 0; r < Q.outerSize(); ++r) {
      double sum = 0.0, off = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Q, r); it; ++it) {
        sum += it.value();
        if (it.col() != r) {
          EXPECT_GT(it.value(), 0.0);
          off += it.value();
        }
      }
      EXPECT_NEAR(sum, 0.0, 1e-12);
      EXPECT_LE(off, chain.max_exit_rate() + 1e-12);
    }
  }
}

TEST(Stationary, SingleQueueIsMM1) {
  const RateEnvironment env({{1, 2}, {0, 0}}, NoTail{});
  const TruncatedChain chain(env, 1, 60, ChainBoundary::lower);
  const auto st = stationary(chain);
  EXPECT_LT(st.residual, 1e-10);
  const auto m = chain.marginal(st.pi, 1);
  for (std::int64_t n = 0; n <= 60; ++n) EXPECT_NEAR(m[std::size_t(n)], geometric_pmf(0.5, n), 1e-12);
}

TEST(Stationary, ClosedDogTwoSheepConditionedProductForm) {
  const TruncatedChain chain(kDogTwoSheep, 2, 40, ChainBoundary::closed_finite);
  const auto rho = finite_speed(kDogTwoSheep, 2).rho;
  EXPECT_NEAR(rho[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(rho[1], 5.0 / 6.0, 1e-15);
  // the cap carries about 1e-4 of the mass here
  EXPECT_THROW(stationary(chain), CapError);
  const auto st = stationary(chain, 1.0);
  EXPECT_LT(st.residual, 1e-10);
  EXPECT_LT(total_variation(st.pi, product_form(chain, rho)), 1e-4);
}

TEST(Stationary, ClosedDogTwoSheepGeometricMarginals) {
  const TruncatedChain chain(kDogTwoSheep, 2, 100, ChainBoundary::closed_finite);
  const auto st = stationary(chain);
  EXPECT_LT(st.residual, 1e-10);
  EXPECT_LT(st.boundary_mass, 1e-6);
  EXPECT_LT(tv_to_geometric(chain.marginal(st.pi, 1), 2.0 / 3.0), 1e-4);
  EXPECT_LT(tv_to_geometric(chain.marginal(st.pi, 2), 5.0 / 6.0), 1e-4);
}

TEST(Stationary, SparsePathAgreesWithProductForm) {
  // 3 queues, C = 30: 5456 states, above the dense limit
  const RateEnvironment env({{1, 3}, {2, 3}, {2, 3}, {1, 1}}, NoTail{});
  const TruncatedChain chain(env, 3, 30, ChainBoundary::closed_finite);
  ASSERT_GT(chain.size(), kDenseSolveLimit);
  const auto st = stationary(chain, 1.0);
  EXPECT_LT(st.residual, 1e-10);
  const auto rho = finite_speed(env, 3).rho;
  EXPECT_LT(total_variation(st.pi, product_form(chain, rho)), 1e-9);
}

TEST(Transient, TimeZeroIsPointMass) {
  const TruncatedChain chain(kDogTwoSheep, 4, 12, ChainBoundary::lower);
  const auto tr = transient_distribution(chain, {1, 0, 2, 0}, 0.0);
  EXPECT_EQ(tr.p(chain.rank({1, 0, 2, 0})), 1.0);
  EXPECT_EQ(tr.p.sum(), 1.0);
}

TEST(Transient, ProbabilityVector) {
  const TruncatedChain chain(kDogTwoSheep, 4, 12, ChainBoundary::lower);
  for (double t : {0.1, 0.5, 3.0}) {
    const auto tr = transient_distribution(chain, {0, 0, 0, 0}, t);
    EXPECT_NEAR(tr.p.sum(), 1.0, 1e-10);
    EXPECT_GE(tr.p.minCoeff(), -1e-15);
    EXPECT_LT(tr.truncation_error, 1e-10);
  }
}

TEST(Transient, LargeTimeAgreesWithStationary) {
  const TruncatedChain chain(kDogTwoSheep, 4, 12, ChainBoundary::lower);
  const auto st = stationary(chain, 1.0);
  // the slowest rate in the chain is a_1 = 0.5
  const auto tr = transient_distribution(chain, {0, 0, 0, 0}, 50.0 / 0.5);
  EXPECT_LT(total_variation(tr.p, st.pi), 1e-4);
}

TEST(Transient, MatchesStoredReference) {
  std::ifstream in(std::string(EXCLOUD_SOURCE_DIR) + "/tests/golden/oracle_dogsheep_transient.json");
  ASSERT_TRUE(in) << "missing golden file";
  const auto golden = nlohmann::json::parse(in);
  const auto ref = golden.at("distribution").get<std::vector<double>>();
  const TruncatedChain chain(kDogTwoSheep, 4, 12, ChainBoundary::lower);
  const auto tr = transient_distribution(chain, {0, 0, 0, 0}, 0.5);
  ASSERT_EQ(std::int64_t(ref.size()), chain.size());
  for (std::int64_t s = 0; s < chain.size(); ++s) EXPECT_NEAR(tr.p(s), ref[std::size_t(s)], 1e-13);
}

TEST(Transient, SingleQueueFirstMoment) {
  // M/M/1 from empty: d/dt E[n] = a - b P(n > 0), so E[n](t) <= a t
  const RateEnvironment env({{1, 2}, {0, 0}}, NoTail{});
  const TruncatedChain chain(env, 1, 60, ChainBoundary::lower);
  const auto tr = transient_distribution(chain, {0}, 0.2);
  double mean = 0.0;
  for (std::int64_t n = 0; n <= 60; ++n) mean += double(n) * tr.p(chain.rank({n}));
  EXPECT_LE(mean, 0.2 + 1e-12);
  EXPECT_GT(mean, 0.2 - 2.0 * 0.2 * 0.2);
}
