#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "gcn/ppo.hpp"
#include "gcn/tiny_lm.hpp"
#include "support/bandit.hpp"

using namespace gcn;

TEST(TokenRewards, KlShapingAndTerminal) {
  PolicySample s{{}, {1, 2, 3}, {-1.0, -2.0, -0.5}, {-1.5, -1.0, -0.5}, 2.0};
  const auto r = token_rewards(s, 0.1);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0], -0.1 * 0.5, 1e-15);
  EXPECT_NEAR(r[1], -0.1 * -1.0, 1e-15);
  EXPECT_NEAR(r[2], 2.0, 1e-15);
  EXPECT_EQ(token_rewards(s, 0.0), (std::vector<double>{0.0, 0.0, 2.0}));
}

TEST(ReturnsToGo, Undiscounted) {
  EXPECT_EQ(returns_to_go({1.0, -2.0, 4.0}), (std::vector<double>{3.0, 2.0, 4.0}));
  EXPECT_TRUE(returns_to_go({}).empty());
}

TEST(PpoUpdate, PositiveAdvantageRaisesLikelihood) {
  TinyLMConfig c;
  c.embedding_dim = 4;
  c.hidden_dim = 8;
  TinyLM lm(Vocabulary({kUnknownToken, "a", "b", "c"}, {}), 3, c);
  const std::vector<int> prompt{1};
  const std::vector<int> cont{2, 3};
  const auto old = lm.score(prompt, cont).logprobs;
  PpoConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 1;
  Rng rng(1);
  auto stats = ppo_update(lm, {{prompt, cont, old, old, 1.0}}, cfg, 0.0, rng);
  EXPECT_FALSE(stats.aborted);
  EXPECT_EQ(stats.updates, 1);
  const auto now = lm.score(prompt, cont).logprobs;
  EXPECT_GT(now[0] + now[1], old[0] + old[1]);
}

TEST(PpoUpdate, ClippingStopsRunawayRatios) {
  TinyLMConfig c;
  c.embedding_dim = 4;
  c.hidden_dim = 8;
  TinyLM lm(Vocabulary({kUnknownToken, "a", "b"}, {}), 2, c);
  const std::vector<int> prompt{1};
  const std::vector<int> cont{2};
  auto old = lm.score(prompt, cont).logprobs;
  old[0] -= 1.0;  // ratio e^1 is outside [0.8, 1.2]
  PpoConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 1;
  Rng rng(1);
  const auto before = lm.parameter_group_values(0);
  auto stats = ppo_update(lm, {{prompt, cont, old, old, 1.0}}, cfg, 0.0, rng);
  EXPECT_DOUBLE_EQ(stats.clip_fraction, 1.0);
  EXPECT_EQ(lm.parameter_group_values(0), before);
}

TEST(PpoUpdate, NonFiniteRewardAborts) {
  TinyLMConfig c;
  c.embedding_dim = 4;
  c.hidden_dim = 8;
  TinyLM lm(Vocabulary({kUnknownToken, "a", "b"}, {}), 2, c);
  const std::vector<int> prompt{1}, cont{2};
  const auto old = lm.score(prompt, cont).logprobs;
  Rng rng(1);
  auto stats = ppo_update(lm, {{prompt, cont, old, old, std::nan("")}}, PpoConfig{}, 0.0, rng);
  EXPECT_TRUE(stats.aborted);
}

TEST(PpoUpdate, MeanKlFromRecordedLogprobs) {
  TinyLMConfig c;
  c.embedding_dim = 4;
  c.hidden_dim = 8;
  TinyLM lm(Vocabulary({kUnknownToken, "a", "b"}, {}), 2, c);
  const std::vector<int> prompt{1}, cont{2, 1};
  auto old = lm.score(prompt, cont).logprobs;
  auto ref = old;
  ref[0] -= 0.25;
  ref[1] -= 0.5;
  Rng rng(1);
  PpoConfig cfg;
  cfg.learning_rate = 0.0;
  auto stats = ppo_update(lm, {{prompt, cont, old, ref, 0.0}, {prompt, cont, old, old, 0.0}}, cfg, 0.1, rng);
  EXPECT_NEAR(stats.mean_kl, 0.375, 1e-12);
}

TEST(Bandit, ConvergesForThreeSeeds) {
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto r = bandit::run(seed);
    EXPECT_GT(r.updates_to_threshold, 0) << "seed " << seed << " p=" << r.final_probability;
    EXPECT_LE(r.updates_to_threshold, 200);
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 60.0);
}
