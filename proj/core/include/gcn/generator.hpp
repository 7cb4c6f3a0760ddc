#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "gcn/corpus.hpp"
#include "gcn/datamodel.hpp"
#include "gcn/lm_backend.hpp"
#include "gcn/ppo.hpp"
#include "gcn/reward.hpp"
#include "gcn/tiny_lm.hpp"

namespace gcn {

// Number of trainable parameter groups (counted from the output side) at a meta-iteration.
struct UnfreezeSchedule {
  std::size_t initial_groups = 1;
  int every = 3;  // one more group every `every` meta-iterations; <= 0 keeps initial_groups

  std::size_t groups_at(int i_meta, std::size_t total_groups) const;
  bool operator==(const UnfreezeSchedule&) const = default;
};

// PolicyToReference refreshes the KL anchor; ReferenceToPolicy copies the anchor back
// into the policy.
enum class SyncMode { PolicyToReference, ReferenceToPolicy, Disabled };

std::string_view to_string(SyncMode mode);
SyncMode parse_sync_mode(std::string_view text);

struct GeneratorConfig {
  SamplerConfig sampler;
  PpoConfig ppo;
  UnfreezeSchedule unfreeze;
  SyncMode sync_mode = SyncMode::PolicyToReference;
  int sync_every = 0;  // meta-iterations between syncs; 0 never syncs
  int pretrain_steps = 400;
  int pretrain_batch_size = 8;
  double pretrain_learning_rate = 3e-3;
  bool allow_cold_start = false;
  int workers = 1;

  bool operator==(const GeneratorConfig&) const = default;
};

struct PromptMode {
  enum class Kind { Unconditional, Labeled, LabelCycle, DialogueChain };
  Kind kind = Kind::Unconditional;
  std::string text;  // label for Labeled, previous response for DialogueChain
  std::vector<std::string> labels;  // LabelCycle: datapoint with id k gets labels[k % size]

  static PromptMode unconditional() { return {}; }
  static PromptMode labeled(std::string label) { return {Kind::Labeled, std::move(label), {}}; }
  static PromptMode label_cycle(std::vector<std::string> labels) { return {Kind::LabelCycle, {}, std::move(labels)}; }
  static PromptMode dialogue_chain(std::string previous = {}) { return {Kind::DialogueChain, std::move(previous), {}}; }
};

struct UpdateStats {
  double mean_kl = 0.0;
  double mean_reward = 0.0;
  double clip_fraction = 0.0;
  double policy_loss = 0.0;
  int updates = 0;
  bool aborted = false;
  double beta_before = 0.0;
  double beta_after = 0.0;
};

// Word-level TinyLM whose vocabulary covers the serialized seed corpus.
std::unique_ptr<TinyLM> make_tiny_backend(const Corpus& seed, const SeparatorSet& separators,
                                          const TinyLMConfig& config = TinyLMConfig{});

class Generator {
 public:
  Generator(std::unique_ptr<LanguageModelBackend> policy, GeneratorConfig config, SeparatorSet separators,
            TaskKind task, std::set<std::string> slot_phrases = {});

  // Supervised training on serialize(e) for the seed, then reference <- clone(policy) and
  // the trainable groups reset to the schedule's start. Returns the last batch loss.
  double pretrain_on_seed(const Corpus& seed, Rng& rng);

  // Datapoint i samples from its own stream derive_seed(stream_seed, i), so the output does
  // not depend on the worker count. Ids are first_id, first_id + 1, ...
  std::vector<GeneratedDatapoint> generate_batch(std::size_t n, const PromptMode& prompt, std::uint64_t stream_seed,
                                                 int meta_iteration, std::uint64_t first_id) const;

  // Every datapoint must carry a reward. Restores the pre-update policy when PPO aborts.
  // Feeds the mean KL into the controller.
  UpdateStats ppo_update(const std::vector<GeneratedDatapoint>& batch, KLController& controller, Rng& rng);

  void advance_unfreeze(int i_meta);
  void sync_reference();

  void save(const std::filesystem::path& dir) const;
  static Generator load(const std::filesystem::path& dir);

  const LanguageModelBackend& policy() const { return *policy_; }
  const LanguageModelBackend& reference() const { return *reference_; }
  LanguageModelBackend& mutable_policy() { return *policy_; }
  const GeneratorConfig& config() const { return config_; }
  GeneratorConfig& mutable_config() { return config_; }
  const SeparatorSet& separators() const { return separators_; }
  TaskKind task() const { return task_; }
  bool pretrained() const { return pretrained_; }

  // Parse and, for slot tagging, align a sampled sequence into a datapoint.
  GeneratedDatapoint interpret(std::vector<int> prompt, Sample sample, std::uint64_t id, int meta_iteration) const;

 private:
  std::unique_ptr<LanguageModelBackend> policy_;
  std::unique_ptr<LanguageModelBackend> reference_;
  GeneratorConfig config_;
  SeparatorSet separators_;
  TaskKind task_;
  std::set<std::string> slot_phrases_;
  bool pretrained_ = false;
};

}  // namespace gcn
