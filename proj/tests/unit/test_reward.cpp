#include <gtest/gtest.h>

#include <random>

#include "gcn/learner.hpp"
#include "gcn/reward.hpp"

using namespace gcn;

TEST(Combine, WorkedExamples) {
  EXPECT_NEAR(combine(0.8, 0.6, 0.5), 0.7, 1e-15);
  EXPECT_DOUBLE_EQ(combine(0.3, 0.3, 0.77), 0.3);
  EXPECT_DOUBLE_EQ(combine(0.42, 0.9, 1.0), 0.42);
  EXPECT_DOUBLE_EQ(combine(0.42, 0.9, 0.0), 0.9);
  EXPECT_THROW(combine(1.2, 0.5, 0.5), std::invalid_argument);
  EXPECT_THROW(combine(0.5, -0.1, 0.5), std::invalid_argument);
  EXPECT_THROW(combine(0.5, 0.5, 2.0), std::invalid_argument);
}

TEST(KlPenalized, WorkedExamples) {
  KLController c;
  c.beta = 0.2;
  const std::vector<double> pi{-1.0, -0.5, -2.0};
  const std::vector<double> rho{-1.25, -0.75, -2.0};  // sum of log-ratios 0.5
  EXPECT_NEAR(kl_penalized(0.7, pi, rho, c).final_reward, 0.6, 1e-15);
  EXPECT_GT(kl_penalized(0.7, rho, pi, c).final_reward, 0.7);
  EXPECT_THROW(kl_penalized(0.7, pi, std::vector<double>{-1.0}, c), std::invalid_argument);
}

// 10^4 random inputs against straight-line arithmetic.
TEST(RewardArithmetic, RandomOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0), lp(-12.0, 0.0), beta(0.0, 2.0);
  std::uniform_int_distribution<int> len(0, 40);
  for (int n = 0; n < 10000; ++n) {
    const double pm = unit(rng), pd = unit(rng), a = unit(rng);
    const double expect_rd = pm * a + pd - pd * a;
    ASSERT_NEAR(combine(pm, pd, a), expect_rd, 1e-12);

    KLController c;
    c.beta = beta(rng);
    std::vector<double> pi(static_cast<std::size_t>(len(rng))), rho(pi.size());
    for (auto& x : pi) x = lp(rng);
    for (auto& x : rho) x = lp(rng);
    double kl = 0.0;
    for (std::size_t t = pi.size(); t-- > 0;) kl += c.beta * pi[t] - c.beta * rho[t];
    const auto r = kl_penalized(expect_rd, pi, rho, c);
    ASSERT_NEAR(r.kl_term, kl, 1e-12);
    ASSERT_NEAR(r.final_reward, expect_rd - kl, 1e-12);
    ASSERT_EQ(r.per_token_log_ratio.size(), pi.size());

    // Identical policies: exactly r_d.
    ASSERT_EQ(kl_penalized(expect_rd, pi, pi, c).final_reward, expect_rd);
    const auto rec = make_reward_record(pm, pd, a, pi, pi, c);
    ASSERT_EQ(rec.final_reward, rec.r_d);
    ASSERT_EQ(rec.kl_term, 0.0);
  }
}

TEST(UpdateBeta, Controller) {
  KLController c;
  c.beta = 0.2;
  c.target_kl = 6.0;
  c.horizon = 100.0;
  EXPECT_DOUBLE_EQ(update_beta(c, 6.0, 10).beta, 0.2);
  EXPECT_GT(update_beta(c, 60.0, 10).beta, 0.2);
  EXPECT_LT(update_beta(c, 0.0, 10).beta, 0.2);
  // Error clipped at +-0.2: beta * (1 + 0.2 * 10 / 100).
  EXPECT_NEAR(update_beta(c, 600.0, 10).beta, 0.2 * 1.02, 1e-15);
  c.adaptive = false;
  EXPECT_EQ(update_beta(c, 600.0, 10).beta, 0.2);
}

TEST(Whiten, MeanZeroUnitVariance) {
  const std::vector<double> v{1, 2, 3, 4, 10};
  const auto w = whiten(v);
  double m = 0, s = 0;
  for (double x : w) m += x;
  m /= 5;
  for (double x : w) s += (x - m) * (x - m);
  EXPECT_NEAR(m, 0.0, 1e-12);
  EXPECT_NEAR(s / 5, 1.0, 1e-9);
  EXPECT_EQ(whiten(std::vector<double>{3, 3, 3}), (std::vector<double>{0, 0, 0}));
}

TEST(Whiten, MalformedTakeTheFloor) {
  const std::vector<double> v{0.9, 0.0, 0.5, 0.1};
  const auto w = whiten_with_floor(v, {false, true, false, false});
  const auto kept = whiten(std::vector<double>{0.9, 0.5, 0.1});
  EXPECT_DOUBLE_EQ(w[0], kept[0]);
  EXPECT_DOUBLE_EQ(w[1], kept[2]);
  EXPECT_DOUBLE_EQ(w[3], kept[2]);
  // All parsed rewards equal: malformed still rank below.
  const auto flat = whiten_with_floor(std::vector<double>{0.5, 0.5, 0.0}, {false, false, true});
  EXPECT_EQ(flat, (std::vector<double>{0.0, 0.0, -1.0}));
  EXPECT_THROW(whiten_with_floor(v, {true}), std::invalid_argument);
}

TEST(TokenF1, Cases) {
  using T = std::vector<std::string>;
  EXPECT_DOUBLE_EQ(token_f1(T{"O", "B-a", "I-a"}, T{"O", "B-a", "I-a"}), 1.0);
  EXPECT_DOUBLE_EQ(token_f1(T{"O", "B-a", "O"}, T{"O", "O", "O"}), 0.0);
  EXPECT_DOUBLE_EQ(token_f1(T{"O", "O"}, T{"O", "O"}), 1.0);
  // tp 1, pred 2, gold 2 -> 0.5
  EXPECT_DOUBLE_EQ(token_f1(T{"B-a", "I-a", "O"}, T{"B-a", "O", "B-b"}), 0.5);
  EXPECT_THROW(token_f1(T{"O"}, T{}), std::invalid_argument);
}

TEST(PerDatapoint, UnusableScoresZero) {
  GeneratedDatapoint d;
  d.rejection = "missing_eos";
  LabelSpace labels;
  labels.intents = {"a", "b"};
  auto learner = spawn(labels, 1);
  EXPECT_EQ(per_datapoint_performance(d, *learner), 0.0);
  d.rejection.reset();
  d.parsed = LabeledExample{"a", "x y", std::nullopt, TaskKind::IntentDetection};
  const double p = per_datapoint_performance(d, *learner);
  EXPECT_TRUE(p == 0.0 || p == 1.0);
}
