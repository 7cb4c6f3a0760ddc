#pragma once

#include <vector>

#include "gcn/lm_backend.hpp"
#include "gcn/rng.hpp"

namespace gcn {

struct PpoConfig {
  int epochs = 4;
  double clip_ratio = 0.2;
  double learning_rate = 1e-5;
  int minibatch_size = 16;
  bool value_baseline = false;  // needs a backend with a value head
  double value_coef = 0.5;

  bool operator==(const PpoConfig&) const = default;
};

struct PolicySample {
  std::vector<int> prompt;
  std::vector<int> continuation;
  std::vector<double> old_logprobs;
  std::vector<double> reference_logprobs;
  double terminal_reward = 0.0;  // already whitened task reward
};

struct PpoStats {
  double mean_kl = 0.0;  // mean over samples of sum_t (old - reference)
  double clip_fraction = 0.0;
  double policy_loss = 0.0;
  int updates = 0;
  bool aborted = false;  // a non-finite loss or gradient was seen; the update stopped there
};

// Per-token rewards: -beta * (old - ref) at every step, terminal reward added at the last.
std::vector<double> token_rewards(const PolicySample& sample, double beta);
// Undiscounted return-to-go.
std::vector<double> returns_to_go(const std::vector<double>& rewards);

// Clipped-surrogate update over `epochs` passes of shuffled minibatches. The caller keeps
// a snapshot and restores it when `aborted` is reported.
PpoStats ppo_update(LanguageModelBackend& policy, const std::vector<PolicySample>& samples, const PpoConfig& config,
                    double beta, Rng& rng);

}  // namespace gcn
