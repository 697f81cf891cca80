#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "iadp/conditionals.hpp"

using namespace iadp;

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

BitAllocInstance flat_instance(std::size_t n, double budget) {
  return BitAllocInstance(std::vector<double>(n, 1.0), std::vector<double>(n, 0.5), std::vector<double>(n, 1.0),
                          budget);
}

Row random_row(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Row r(m);
  double s = 0.0;
  for (auto& v : r) s += (v = u(rng));
  for (auto& v : r) v /= s;
  return r;
}

// Sum_j s_j Sum_i p(i|j) [ln p(i|j)/m(i) + beta G_ji] with m the marginal of p.
double free_energy(const std::vector<Row>& p, const Row& s, const ValueTable& g, double beta) {
  const std::size_t m = s.size();
  Row marg(m, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) marg[i] += s[j] * p[j][i];
  double f = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i)
      if (p[j][i] > 0) f += s[j] * p[j][i] * (std::log(p[j][i] / marg[i]) + beta * g[j][i]);
  return f;
}

}  // namespace

TEST(Sigmoid, NearlyExhaustedBudget) {
  auto inst = flat_instance(8, 32.0);
  SigmoidConditionalConfig cfg{0.0, 0};
  auto row = sigmoid_conditional(inst, Path{3, 2, 1, 4}, cfg);
  double w[4] = {logistic(0.0), logistic(-2.0), logistic(-6.0), logistic(-14.0)};
  double total = w[0] + w[1] + w[2] + w[3];
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(row.probs[k], w[k] / total, 1e-12);
  EXPECT_NEAR(row.probs[0], 0.8043, 1e-4);
  EXPECT_NEAR(row.probs[1], 0.1917, 1e-4);
  EXPECT_NEAR(row.probs[2], 0.0040, 1e-4);
  EXPECT_NEAR(row.probs[3], 1.3e-6, 1e-7);
  EXPECT_FALSE(row.exhausted);
}

TEST(Sigmoid, SmallestSymbolMasksEverythingElse) {
  auto inst = flat_instance(8, 32.0);
  auto row = sigmoid_conditional(inst, Path{1}, {0.0, 0});
  EXPECT_EQ(row.probs, (Row{1.0, 0.0, 0.0, 0.0}));
}

TEST(Sigmoid, SlackBudgetIsUniform) {
  auto inst = flat_instance(8, 1e6);
  auto row = sigmoid_conditional(inst, Path{4}, {0.0, 0});
  for (double v : row.probs) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Sigmoid, UnderflowFallsBackToLargestAllowedSymbol) {
  auto inst = flat_instance(64, 32.0);
  auto row = sigmoid_conditional(inst, Path(60, 4), {0.0, 0});
  EXPECT_TRUE(row.exhausted);
  EXPECT_EQ(row.probs, (Row{0.0, 0.0, 0.0, 1.0}));
}

TEST(Sigmoid, RejectsEmptyPrefixAndNegativeSigma) {
  auto inst = flat_instance(8, 32.0);
  EXPECT_THROW(sigmoid_conditional(inst, Path{}, {}), ContractError);
  EXPECT_THROW(sigmoid_conditional(inst, Path{4}, {-1.0, 0}), ConfigError);
}

TEST(Sigmoid, NoisyRowsAreStochasticMaskedAndReproducible) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> sym(1, 4);
  for (int trial = 0; trial < 2000; ++trial) {
    auto inst = flat_instance(8, 32.0);
    Path prefix(1 + trial % 7);
    for (auto& x : prefix) x = sym(rng);
    SigmoidConditionalConfig cfg{0.05, static_cast<std::uint64_t>(trial)};
    auto row = sigmoid_conditional(inst, prefix, cfg);
    ASSERT_TRUE(is_distribution(row.probs));
    for (Symbol x = prefix.back() + 1; x <= 4; ++x) EXPECT_EQ(row.probs[x - 1], 0.0);
    EXPECT_EQ(row.probs, sigmoid_conditional(inst, prefix, cfg).probs);
  }
}

TEST(Baa, ZeroBetaCopiesTheMarginal) {
  std::mt19937_64 rng(5);
  Row s = random_row(rng, 4);
  std::vector<Row> p{random_row(rng, 4), random_row(rng, 4), random_row(rng, 4), random_row(rng, 4)};
  ValueTable g(4, Row{1.0, -2.0, 3.0, 0.5});
  auto step = baa_update(p, s, g, 0.0);
  for (const auto& row : step.conditional)
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(row[i], step.marginal[i], 1e-15);
}

TEST(Baa, ConstantValuesKeepUniformRows) {
  Row s(3, 1.0 / 3);
  std::vector<Row> p(3, Row(3, 1.0 / 3));
  ValueTable g(3, Row(3, 2.5));
  auto step = baa_update(p, s, g, 4.0);
  for (const auto& row : step.conditional)
    for (double v : row) EXPECT_NEAR(v, 1.0 / 3, 1e-15);
}

TEST(Baa, TwoSymbolClosedForm) {
  Row s{0.5, 0.5};
  std::vector<Row> p(2, Row{0.5, 0.5});
  ValueTable g(2, Row{0.0, 1.0});
  auto step = baa_update(p, s, g, 1.0);
  const double e = std::exp(-1.0);
  EXPECT_NEAR(step.conditional[0][0], 1.0 / (1.0 + e), 1e-15);
  EXPECT_NEAR(step.conditional[0][0], 0.7311, 1e-4);
  EXPECT_NEAR(step.conditional[1][1], 0.2689, 1e-4);
}

TEST(Baa, ForbiddenEntriesGetNoMass) {
  const double inf = std::numeric_limits<double>::infinity();
  Row s{0.5, 0.5};
  std::vector<Row> p(2, Row{0.5, 0.5});
  ValueTable g{{0.0, 0.0}, {inf, 0.0}};
  auto step = baa_update(p, s, g, 1.0);
  EXPECT_EQ(step.conditional[1][0], 0.0);
  EXPECT_EQ(step.conditional[1][1], 1.0);
}

TEST(Baa, HugeBetaStaysFinite) {
  Row s{0.5, 0.5};
  std::vector<Row> p(2, Row{0.5, 0.5});
  ValueTable g(2, Row{1000.0, 1001.0});
  auto step = baa_update(p, s, g, 1e4);
  EXPECT_TRUE(is_distribution(step.conditional[0]));
  EXPECT_EQ(step.conditional[0][0], 1.0);
}

TEST(Baa, FixedPointConvergesInOneIteration) {
  Row s{0.2, 0.3, 0.5};
  Row m{0.1, 0.6, 0.3};
  ValueTable g(3, Row{1.0, 2.0, 3.0});
  auto res = baa_conditional(s, m, g, BaaConfig{200, 1e-8, 0.0});
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 1u);
}

TEST(Baa, TwoSymbolToyConverges) {
  Row s{0.5, 0.5};
  ValueTable g(2, Row{0.0, 1.0});
  auto res = baa_conditional(s, Row{0.5, 0.5}, g, BaaConfig{1000, 1e-12, 1.0});
  ASSERT_TRUE(res.converged);
  // With identical rows the fixed point puts all mass on the cheaper symbol.
  EXPECT_GT(res.conditional[0][0], 1.0 - 1e-6);
}

TEST(Baa, ReportsNonConvergence) {
  Row s{0.5, 0.5};
  ValueTable g{{0.0, 1.0}, {0.0, 2.0}};
  auto res = baa_conditional(s, Row{0.5, 0.5}, g, BaaConfig{2, 1e-15, 0.3});
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 2u);
}

TEST(Baa, FreeEnergyIsNonIncreasing) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + trial % 4;
    Row s = random_row(rng, m);
    ValueTable g(m, Row(m));
    for (auto& row : g)
      for (auto& v : row) v = n(rng);
    const double beta = 0.1 + 0.05 * (trial % 40);
    std::vector<Row> p(m, random_row(rng, m));
    double prev = free_energy(p, s, g, beta);
    for (int it = 0; it < 30; ++it) {
      auto step = baa_update(p, s, g, beta);
      for (const auto& row : step.conditional) ASSERT_TRUE(is_distribution(row));
      double now = free_energy(step.conditional, s, g, beta);
      EXPECT_LE(now, prev + 1e-12);
      prev = now;
      p = std::move(step.conditional);
    }
  }
}

TEST(Baa, RejectsBadConfigAndShapes) {
  Row s{0.5, 0.5};
  ValueTable g(2, Row{0.0, 1.0});
  EXPECT_THROW(baa_conditional(s, s, g, BaaConfig{0, 1e-8, 1.0}), ConfigError);
  EXPECT_THROW(baa_conditional(s, s, g, BaaConfig{10, 0.0, 1.0}), ConfigError);
  EXPECT_THROW(baa_conditional(s, Row{0.7, 0.7}, g, {}), ContractError);
  std::vector<Row> p(3, Row(2, 0.5));
  EXPECT_THROW(baa_update(p, s, g, 1.0), ContractError);
}
