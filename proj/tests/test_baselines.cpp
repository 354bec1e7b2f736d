#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "linucbd/baselines.hpp"
#include "linucbd/error.hpp"
#include "linucbd/policy.hpp"
#include "linucbd/presets.hpp"
#include "oracles.hpp"

using namespace linucbd;

TEST(TabularUcb, UnpulledIndexIsInfinite) {
  TabularUcb ucb(2);
  EXPECT_TRUE(std::isinf(ucb.index(0, 3, 1)));
  EXPECT_EQ(ucb.select(3, 1), 0u);
  ucb.update(0, 3, 1.0);
  EXPECT_EQ(ucb.select(3, 2), 1u);
}

TEST(TabularUcb, IndexValue) {
  TabularUcb ucb(2);
  ucb.update(1, 0, 0.5);
  ucb.update(1, 0, 0.7);
  // mean 0.6 + sqrt(2 ln f(10)) / sqrt(2)
  const double expected = 0.6 + std::sqrt(2.0 * std::log(static_cast<double>(oracle::f_of(10)))) / std::sqrt(2.0);
  EXPECT_NEAR(ucb.index(1, 0, 10), expected, 1e-12);
  EXPECT_EQ(ucb.cell(1, 0).count, 2u);
  EXPECT_THROW(ucb.update(5, 0, 0.0), Error);
}

TEST(TabularUcb, ContextsAreIndependent) {
  TabularUcb ucb(2);
  for (int i = 0; i < 10; ++i) ucb.update(0, 1, 1.0);
  EXPECT_EQ(ucb.cell(0, 2).count, 0u);
  EXPECT_TRUE(std::isinf(ucb.index(0, 2, 5)));
}

TEST(RidgeLinUcb, MatchesDirectRidgeProperty) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t d = 3;
  RidgeLinUcb ridge(1, {1.0, 1.0, d});
  std::vector<Vector> xs;
  std::vector<double> ys;
  for (int i = 0; i < 50; ++i) {
    xs.push_back(oracle::in_ball(rng, d, 1.0));
    ys.push_back(noise(rng));
    ridge.update(0, xs.back(), ys.back());
  }
  for (int k = 0; k < 10; ++k) {
    const Vector x = oracle::in_ball(rng, d, 1.0);
    const auto e = ridge.estimate(0, x, 0.0);
    const auto direct = oracle::direct_estimate(xs, ys, 1.0, x);
    EXPECT_NEAR(e.r_hat, direct.r_hat, 1e-10);
    EXPECT_NEAR(e.sigma_hat, direct.sigma_hat, 1e-10);
  }
}

TEST(RidgeLinUcb, EquivalentToLinUcbDOnRandomHistoriesProperty) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 3;
    RidgeLinUcb ridge(1, {1.0, 1.0, d});
    ArmState arm(d, 1.0, true);
    std::vector<Vector> pool;
    for (int c = 0; c < 6; ++c) pool.push_back(oracle::in_ball(rng, d, 1.0));
    std::uniform_int_distribution<int> pick(0, 5);
    for (int i = 0; i < 50; ++i) {
      const int c = pick(rng);
      const double y = noise(rng);
      ridge.update(0, pool[c], y);
      arm.update(pool[c], y, static_cast<std::uint64_t>(c));
    }
    const Vector x = oracle::in_ball(rng, d, 1.0);
    const auto r = ridge.estimate(0, x, 1.0);
    const auto e = arm.estimate_explicit(x, 1.0);
    EXPECT_NEAR(r.r_hat, e.r_hat, 1e-9);
    EXPECT_NEAR(r.sigma_hat, e.sigma_hat, 1e-9);
  }
}

TEST(Policies, FactoryAndRejections) {
  const auto finite = preset("paper61");
  const auto general = preset("paper62");
  for (const auto& name : policy_names()) {
    auto p = make_policy(name, finite.instance);
    EXPECT_EQ(p->name(), name);
  }
  try {
    make_policy("ucb-per-context", general.instance);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
  }
  try {
    make_policy("thompson", finite.instance);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownPolicy);
  }
}

TEST(Policies, LinUcbDAndRidgePickSameArms) {
  const auto p = preset("paper61");
  const auto& inst = std::get<FiniteInstance>(p.instance);
  auto a = make_policy("linucb-d", p.instance);
  auto b = make_policy("linucb", p.instance);
  RoundSampler sampler(p.instance, 17);
  for (std::size_t t = 1; t <= 3000; ++t) {
    const Round r = sampler.next();
    const auto ia = a->choose(t, r);
    const auto ib = b->choose(t, r);
    ASSERT_EQ(ia, ib) << "round " << t;
    const double y = inst.reward(ia, *r.context) + r.noise;
    a->observe(t, r, ia, y);
    b->observe(t, r, ib, y);
  }
}
