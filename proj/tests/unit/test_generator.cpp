#include <gtest/gtest.h>

#include <filesystem>

#include "gcn/fixture.hpp"
#include "gcn/generator.hpp"
#include "gcn/hygiene.hpp"
#include "gcn/wireformat.hpp"

using namespace gcn;

namespace {

TinyLMConfig small_lm() {
  TinyLMConfig c;
  c.embedding_dim = 8;
  c.hidden_dim = 24;
  c.context_window = 3;
  return c;
}

Generator make(const Corpus& seed, TaskKind task, GeneratorConfig cfg = {}, std::set<std::string> phrases = {}) {
  return Generator(make_tiny_backend(seed, SeparatorSet{}, small_lm()), cfg, SeparatorSet{}, task, std::move(phrases));
}

Corpus one_example() {
  Corpus c;
  c.examples.push_back({"set_alarm", "wake me at noon", std::nullopt, TaskKind::IntentDetection});
  return c;
}

GeneratorConfig greedy() {
  GeneratorConfig g;
  g.sampler.top_k = 1;
  g.sampler.max_new_tokens = 16;
  g.pretrain_steps = 150;
  return g;
}

Sample as_sample(const Generator& g, std::string_view text) {
  Sample s;
  s.tokens = g.policy().tokenize(text);
  s.logprobs.assign(s.tokens.size(), -1.0);
  return s;
}

}  // namespace

TEST(Unfreeze, Schedule) {
  UnfreezeSchedule s{1, 3};
  EXPECT_EQ(s.groups_at(0, 4), 1u);
  EXPECT_EQ(s.groups_at(2, 4), 1u);
  EXPECT_EQ(s.groups_at(3, 4), 2u);
  EXPECT_EQ(s.groups_at(9, 4), 4u);
  EXPECT_EQ(s.groups_at(100, 4), 4u);
  EXPECT_EQ((UnfreezeSchedule{2, 0}).groups_at(50, 4), 2u);
}

TEST(Sync, ParseRoundTrip) {
  for (auto m : {SyncMode::PolicyToReference, SyncMode::ReferenceToPolicy, SyncMode::Disabled})
    EXPECT_EQ(parse_sync_mode(to_string(m)), m);
  EXPECT_THROW(parse_sync_mode("sometimes"), std::invalid_argument);
}

TEST(Generator, PretrainMemorizesSingleExample) {
  const auto seed = one_example();
  auto g = make(seed, TaskKind::IntentDetection, greedy());
  Rng rng(3);
  const double loss = g.pretrain_on_seed(seed, rng);
  EXPECT_LT(loss, 0.1);
  EXPECT_TRUE(g.pretrained());
  const auto batch = g.generate_batch(3, PromptMode::unconditional(), 11, 0, 0);
  for (const auto& d : batch) {
    ASSERT_TRUE(d.usable()) << d.raw_text;
    EXPECT_EQ(d.raw_text, serialize(seed.examples[0]));
    EXPECT_EQ(d.parsed->label, "set_alarm");
    EXPECT_EQ(d.token_logprobs_policy.size(), d.generated_tokens.size());
    EXPECT_EQ(d.token_logprobs_reference.size(), d.generated_tokens.size());
  }
  // Reference is a clone of the pretrained policy.
  EXPECT_EQ(batch[0].token_logprobs_policy, batch[0].token_logprobs_reference);
}

TEST(Generator, ColdStartRules) {
  const auto seed = one_example();
  auto g = make(seed, TaskKind::IntentDetection);
  EXPECT_THROW(g.generate_batch(1, PromptMode::unconditional(), 1, 0, 0), std::logic_error);
  Rng rng(1);
  EXPECT_THROW(g.pretrain_on_seed(Corpus{}, rng), std::invalid_argument);

  GeneratorConfig cold;
  cold.allow_cold_start = true;
  cold.sampler.max_new_tokens = 4;
  auto c = make(seed, TaskKind::IntentDetection, cold);
  EXPECT_EQ(c.generate_batch(2, PromptMode::unconditional(), 1, 0, 0).size(), 2u);
}

TEST(Generator, RefusesTestSplit) {
  auto seed = one_example();
  seed.split = SplitTag::Test;
  auto g = make(seed, TaskKind::IntentDetection);
  Rng rng(1);
  EXPECT_THROW(g.pretrain_on_seed(seed, rng), hygiene::TestSetLeak);
}

TEST(Generator, LabelCycleAssignsPromptsById) {
  const auto b = fixture::make(TaskKind::IntentDetection, 2, {3, 1, 1});
  GeneratorConfig cfg;
  cfg.pretrain_steps = 5;
  cfg.sampler.max_new_tokens = 6;
  auto g = make(b.train, TaskKind::IntentDetection, cfg);
  Rng rng(1);
  g.pretrain_on_seed(b.train, rng);
  const std::vector<std::string> labels{"play_music", "set_alarm"};
  const auto batch = g.generate_batch(5, PromptMode::label_cycle(labels), 9, 2, 7);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    EXPECT_EQ(batch[i].id, 7 + i);
    EXPECT_EQ(batch[i].meta_iteration, 2);
    EXPECT_EQ(batch[i].prompt_tokens, g.policy().tokenize("<BOS> " + labels[(7 + i) % 2] + " <GO>"));
  }
  EXPECT_THROW(g.generate_batch(1, PromptMode::label_cycle({}), 9, 0, 0), std::invalid_argument);
}

TEST(Generator, WorkerCountDoesNotChangeOutput) {
  const auto b = fixture::make(TaskKind::IntentDetection, 2, {4, 1, 1});
  GeneratorConfig cfg;
  cfg.pretrain_steps = 20;
  cfg.sampler.max_new_tokens = 12;
  auto g = make(b.train, TaskKind::IntentDetection, cfg);
  Rng rng(5);
  g.pretrain_on_seed(b.train, rng);
  const auto serial = g.generate_batch(9, PromptMode::unconditional(), 42, 0, 0);
  g.mutable_config().workers = 3;
  const auto threaded = g.generate_batch(9, PromptMode::unconditional(), 42, 0, 0);
  ASSERT_EQ(serial.size(), threaded.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].raw_text, threaded[i].raw_text);
    EXPECT_EQ(serial[i].token_logprobs_policy, threaded[i].token_logprobs_policy);
  }
  const auto other = g.generate_batch(9, PromptMode::unconditional(), 43, 0, 0);
  bool any_diff = false;
  for (std::size_t i = 0; i < other.size(); ++i) any_diff |= other[i].raw_text != serial[i].raw_text;
  EXPECT_TRUE(any_diff);
}

TEST(Generator, InterpretRejections) {
  const auto b = fixture::make(TaskKind::SlotTagging, 2, {4, 1, 1});
  auto g = make(b.train, TaskKind::SlotTagging, {}, {"city", "date"});
  const auto prompt = g.policy().tokenize("<BOS>");

  auto bad = g.interpret(prompt, as_sample(g, "city boston <EOS>"), 1, 0);
  EXPECT_FALSE(bad.usable());
  EXPECT_EQ(bad.rejection, "missing_go");

  auto unaligned = g.interpret(prompt, as_sample(g, "city paris <GO> fly to boston <EOS>"), 2, 0);
  EXPECT_TRUE(unaligned.parsed.has_value());
  EXPECT_EQ(unaligned.rejection, "alignment_not_found");

  auto ok = g.interpret(prompt, as_sample(g, "city boston <GO> fly to boston <EOS>"), 3, 4);
  ASSERT_TRUE(ok.usable());
  EXPECT_EQ(*ok.parsed->iob_tags, (std::vector<std::string>{"O", "O", "B-city"}));
  EXPECT_EQ(ok.id, 3u);
  EXPECT_EQ(ok.meta_iteration, 4);
}

TEST(Generator, AdvanceUnfreezeNeverShrinks) {
  const auto seed = one_example();
  GeneratorConfig cfg;
  cfg.pretrain_steps = 2;
  cfg.unfreeze = {1, 2};
  auto g = make(seed, TaskKind::IntentDetection, cfg);
  Rng rng(1);
  g.pretrain_on_seed(seed, rng);
  EXPECT_EQ(g.policy().trainable_groups(), 1u);
  g.advance_unfreeze(4);
  EXPECT_EQ(g.policy().trainable_groups(), 3u);
  g.advance_unfreeze(0);
  EXPECT_EQ(g.policy().trainable_groups(), 3u);
}

TEST(Generator, SyncModes) {
  const auto seed = one_example();
  GeneratorConfig cfg;
  cfg.pretrain_steps = 3;
  auto g = make(seed, TaskKind::IntentDetection, cfg);
  Rng rng(1);
  g.pretrain_on_seed(seed, rng);
  const auto anchor = g.reference().parameter_group_values(0);
  g.mutable_policy().train_supervised({g.policy().tokenize(serialize(seed.examples[0]))}, 0.05);
  const auto moved = g.policy().parameter_group_values(0);
  ASSERT_NE(moved, anchor);

  g.mutable_config().sync_mode = SyncMode::Disabled;
  g.sync_reference();
  EXPECT_EQ(g.reference().parameter_group_values(0), anchor);

  g.mutable_config().sync_mode = SyncMode::ReferenceToPolicy;
  g.sync_reference();
  EXPECT_EQ(g.policy().parameter_group_values(0), anchor);
  EXPECT_EQ(g.policy().trainable_groups(), 1u);

  g.mutable_policy().train_supervised({g.policy().tokenize(serialize(seed.examples[0]))}, 0.05);
  g.mutable_config().sync_mode = SyncMode::PolicyToReference;
  g.sync_reference();
  EXPECT_EQ(g.reference().parameter_group_values(0), g.policy().parameter_group_values(0));
}

TEST(Generator, UpdateNeedsRewards) {
  const auto seed = one_example();
  GeneratorConfig cfg;
  cfg.pretrain_steps = 3;
  cfg.sampler.max_new_tokens = 8;
  auto g = make(seed, TaskKind::IntentDetection, cfg);
  Rng rng(1);
  g.pretrain_on_seed(seed, rng);
  auto batch = g.generate_batch(4, PromptMode::unconditional(), 1, 0, 0);
  KLController kl;
  EXPECT_THROW(g.ppo_update(batch, kl, rng), std::invalid_argument);
  EXPECT_THROW(g.ppo_update({}, kl, rng), std::invalid_argument);
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i].reward = RewardRecord{0.5, 0.1 * i, 0.1 * i, 0, 0.1 * i};
  const auto st = g.ppo_update(batch, kl, rng);
  EXPECT_FALSE(st.aborted);
  EXPECT_EQ(st.beta_before, 0.2);
  EXPECT_EQ(st.beta_after, kl.beta);
}

TEST(Generator, SaveLoadReproducesSamples) {
  const auto b = fixture::make(TaskKind::IntentDetection, 2, {3, 1, 1});
  GeneratorConfig cfg;
  cfg.pretrain_steps = 10;
  cfg.sampler.max_new_tokens = 10;
  cfg.sync_every = 2;
  auto g = make(b.train, TaskKind::IntentDetection, cfg);
  Rng rng(1);
  g.pretrain_on_seed(b.train, rng);
  const auto dir = std::filesystem::temp_directory_path() / "gcn_generator_save";
  std::filesystem::remove_all(dir);
  g.save(dir);
  auto h = Generator::load(dir);
  EXPECT_EQ(h.config(), g.config());
  EXPECT_EQ(h.task(), g.task());
  EXPECT_TRUE(h.pretrained());
  const auto x = g.generate_batch(5, PromptMode::unconditional(), 8, 0, 0);
  const auto y = h.generate_batch(5, PromptMode::unconditional(), 8, 0, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x[i].raw_text, y[i].raw_text);
    EXPECT_EQ(x[i].token_logprobs_reference, y[i].token_logprobs_reference);
  }
  std::filesystem::remove_all(dir);
}
