#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "iadp/baselines.hpp"
#include "iadp/distributions.hpp"

using namespace iadp;

namespace {

Row random_row(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Row r(m);
  double s = 0.0;
  for (auto& v : r) s += (v = u(rng));
  for (auto& v : r) v /= s;
  return r;
}

std::size_t idx(Symbol s) { return static_cast<std::size_t>(s - 1); }

}  // namespace

TEST(Kl, IdenticalRowsGiveZero) {
  Row p{0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(kl_divergence(p, p), 0.0);
}

TEST(Kl, PointMassAgainstUniformIsTwoBits) {
  EXPECT_DOUBLE_EQ(kl_divergence(Row{1, 0, 0, 0}, Row{0.25, 0.25, 0.25, 0.25}), 2.0);
}

TEST(Kl, MatchesDirectSummation) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    Row p = random_row(rng, 4), q = random_row(rng, 4);
    double direct = p[0] * std::log(p[0] / q[0]) + p[1] * std::log(p[1] / q[1]) +
                    p[2] * std::log(p[2] / q[2]) + p[3] * std::log(p[3] / q[3]);
    EXPECT_NEAR(kl_divergence(p, q), direct / std::log(2.0), 1e-12);
  }
}

TEST(Kl, InfiniteWhereSupportIsMissing) {
  EXPECT_TRUE(std::isinf(kl_divergence(Row{0.5, 0.5}, Row{1.0, 0.0})));
  EXPECT_EQ(kl_divergence(Row{1.0, 0.0}, Row{0.5, 0.5}), 1.0);
}

TEST(Kl, RejectsUnnormalizedRows) {
  EXPECT_THROW(kl_divergence(Row{0.5, 0.6}, Row{0.5, 0.5}), ContractError);
  EXPECT_THROW(kl_divergence(Row{0.5, 0.5}, Row{1.0}), ContractError);
}

TEST(ConditionalModel, DefaultsAreUniformAndValidated) {
  ConditionalModel m(3, 4);
  EXPECT_EQ(m.transitions(), 2u);
  EXPECT_TRUE(is_distribution(m.row(1, 3)));
  EXPECT_THROW(m.row(2, 0), ContractError);
  EXPECT_THROW(m.set_row(0, 0, Row{0.5, 0.5, 0.5, 0.5}), ContractError);
  EXPECT_THROW(m.set_occupancy(0, 0, 1.5), ContractError);
  EXPECT_THROW(ConditionalModel(0, 4), ConfigError);
}

TEST(ConditionalModel, StageMarginalsPropagate) {
  ConditionalModel m(2, 2);
  m.set_initial(Row{0.25, 0.75});
  m.set_row(0, 0, Row{1.0, 0.0});
  m.set_row(0, 1, Row{0.5, 0.5});
  auto marg = m.stage_marginals();
  ASSERT_EQ(marg.size(), 2u);
  EXPECT_DOUBLE_EQ(marg[1][0], 0.25 + 0.375);
  EXPECT_DOUBLE_EQ(marg[1][1], 0.375);
}

TEST(Prior, SingleSolutionFrequencies) {
  auto inst = generate_instance(1, 8);
  std::vector<Path> sols{{4, 2, 1, 1, 1, 1, 1, 1}};
  auto q = prior_from_solutions(inst.problem(), sols, 0.0);
  EXPECT_EQ(q.row(0, idx(4))[idx(2)], 1.0);
  EXPECT_EQ(q.initial()[idx(4)], 1.0);
  EXPECT_TRUE(q.unsupported(0, idx(1)));
  EXPECT_FALSE(q.unsupported(0, idx(4)));
  EXPECT_EQ(q.row(0, idx(1))[0], 0.25);
}

TEST(Prior, TwoSolutionFrequencies) {
  auto inst = generate_instance(1, 8);
  std::vector<Path> sols{{4, 2, 1, 1, 1, 1, 1, 1}, {4, 1, 1, 1, 1, 1, 1, 1}};
  auto q = prior_from_solutions(inst.problem(), sols, 0.0);
  EXPECT_EQ(q.row(0, idx(4))[idx(2)], 0.5);
  EXPECT_EQ(q.row(0, idx(4))[idx(1)], 0.5);
  EXPECT_EQ(q.occupancy(1, idx(2)), 0.5);
  EXPECT_EQ(q.occupancy(1, idx(1)), 0.5);
}

TEST(Prior, SmoothedRowsStayStochasticAndPositive) {
  auto inst = generate_instance(1, 8);
  std::vector<Path> sols{{4, 2, 1, 1, 1, 1, 1, 1}, {4, 1, 1, 1, 1, 1, 1, 1}};
  auto q = prior_from_solutions(inst.problem(), sols, 0.05);
  EXPECT_TRUE(is_distribution(q.initial()));
  for (std::size_t t = 0; t < q.transitions(); ++t) {
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_TRUE(is_distribution(q.row(t, j)));
      for (double v : q.row(t, j)) EXPECT_GT(v, 0.0);
    }
  }
  EXPECT_NEAR(q.row(0, idx(4))[idx(2)], 1.05 / 2.2, 1e-15);
}

TEST(Sampler, RetainsTopRewardsOfFeasibleDraws) {
  auto inst = generate_instance(5, 8);
  SamplerConfig cfg;
  cfg.k = 300;
  cfg.n1 = 20;
  cfg.seed = 9;
  auto s = sample_solutions(inst.problem(), cfg);
  ASSERT_EQ(s.solutions.size(), 20u);
  EXPECT_GE(s.attempts, 300u);
  for (std::size_t i = 0; i < s.solutions.size(); ++i) {
    EXPECT_TRUE(csf(inst, s.solutions[i]));
    EXPECT_DOUBLE_EQ(s.rewards[i], reward(inst, s.solutions[i]));
    if (i > 0) {
      EXPECT_TRUE(s.rewards[i] < s.rewards[i - 1] ||
                  (s.rewards[i] == s.rewards[i - 1] && s.solutions[i - 1] <= s.solutions[i]));
    }
  }
}

TEST(Sampler, DeterministicPerSeed) {
  auto inst = generate_instance(5, 8);
  SamplerConfig cfg;
  cfg.k = 200;
  cfg.n1 = 10;
  cfg.seed = 4;
  EXPECT_EQ(estimate_prior(inst, cfg), estimate_prior(inst, cfg));
  auto other = cfg;
  other.seed = 5;
  EXPECT_EQ(sample_solutions(inst.problem(), cfg).attempts, sample_solutions(inst.problem(), cfg).attempts);
  EXPECT_NE(sample_solutions(inst.problem(), cfg).attempts, sample_solutions(inst.problem(), other).attempts);
}

TEST(Sampler, ReportsExhaustedAttemptBudget) {
  auto inst = generate_instance(5, 8);
  SamplerConfig cfg;
  cfg.k = 100;
  cfg.n1 = 10;
  cfg.max_attempts = 1000;
  try {
    sample_solutions(inst.problem(), cfg);
    FAIL() << "expected a sampling failure";
  } catch (const SamplingError& e) {
    EXPECT_EQ(e.attempts(), 1000u);
    EXPECT_LT(e.collected(), 100u);
  }
}

TEST(Sampler, RejectsBadSizes) {
  auto inst = generate_instance(5, 8);
  SamplerConfig cfg;
  cfg.k = 5;
  cfg.n1 = 10;
  EXPECT_THROW(sample_solutions(inst.problem(), cfg), ConfigError);
  cfg.n1 = 0;
  EXPECT_THROW(sample_solutions(inst.problem(), cfg), ConfigError);
}

TEST(Prior, ConcentratesOnTheOptimumWhenTheSpaceIsCovered) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = generate_instance(seed, 4);
    auto es = exhaustive_search(inst.problem());
    ASSERT_TRUE(es.solution);
    SamplerConfig cfg;
    cfg.k = 256;
    cfg.n1 = 1;
    cfg.seed = seed;
    auto samples = sample_solutions(inst.problem(), cfg);
    EXPECT_EQ(samples.solutions.front(), *es.solution);
    auto q = prior_from_solutions(inst.problem(), samples.solutions, 0.0);
    const Path& best = *es.solution;
    EXPECT_EQ(q.initial()[idx(best[0])], 1.0);
    for (std::size_t t = 0; t + 1 < 4; ++t) EXPECT_EQ(q.row(t, idx(best[t]))[idx(best[t + 1])], 1.0);
  }
}
