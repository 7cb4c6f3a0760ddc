#pragma once

// Three-token bandit: a TinyLM over {<UNK>, a, b} emits one token after a fixed prompt;
// emitting the target earns reward 1, anything else 0. Rewards are whitened per batch and
// fed through the PPO update with no KL penalty.

#include <cmath>
#include <vector>

#include "gcn/ppo.hpp"
#include "gcn/reward.hpp"
#include "gcn/tiny_lm.hpp"

namespace bandit {

struct Result {
  int updates_to_threshold = -1;  // first update after which p(target) > threshold, -1 if never
  double final_probability = 0.0;
};

inline Result run(std::uint64_t seed, int max_updates = 200, double threshold = 0.9, int batch = 16) {
  gcn::TinyLMConfig c;
  c.embedding_dim = 4;
  c.hidden_dim = 8;
  c.context_window = 1;
  c.seed = seed;
  gcn::TinyLM policy(gcn::Vocabulary({gcn::kUnknownToken, "a", "b"}, {}), 1, c);
  const int target = 2;
  const std::vector<int> prompt{0};  // <UNK> doubles as the start context
  gcn::SamplerConfig sampler;
  sampler.max_new_tokens = 1;
  sampler.top_k = 0;
  gcn::PpoConfig ppo;
  ppo.epochs = 2;
  ppo.learning_rate = 0.5;
  ppo.minibatch_size = batch;
  gcn::Rng rng(gcn::derive_seed(seed, 99));

  auto p_target = [&] { return std::exp(policy.next_token_logprobs(prompt)[target]); };
  Result r;
  for (int u = 1; u <= max_updates; ++u) {
    std::vector<gcn::PolicySample> samples;
    std::vector<double> rewards;
    for (int i = 0; i < batch; ++i) {
      auto s = policy.sample(prompt, sampler, rng);
      rewards.push_back(s.tokens.at(0) == target ? 1.0 : 0.0);
      samples.push_back({prompt, s.tokens, s.logprobs, s.logprobs, 0.0});
    }
    const auto w = gcn::whiten(rewards);
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i].terminal_reward = w[i];
    gcn::ppo_update(policy, samples, ppo, 0.0, rng);
    r.final_probability = p_target();
    if (r.final_probability > threshold) {
      r.updates_to_threshold = u;
      break;
    }
  }
  return r;
}

}  // namespace bandit
