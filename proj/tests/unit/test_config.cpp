#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "gcn/fixture.hpp"
#include "gcn/keyvalue.hpp"
#include "gcn/run_config.hpp"

using namespace gcn;

TEST(KeyValue, ParsesCommentsAndBlanks) {
  const auto kv = parse_key_values("# top\n\nseeds = 1,2  # trailing\n mode=baseline\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("seeds"), "1,2");
  EXPECT_EQ(kv.at("mode"), "baseline");
}

TEST(KeyValue, RejectsDuplicatesAndJunk) {
  EXPECT_THROW(parse_key_values("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(parse_key_values("just words\n"), ConfigError);
  try {
    parse_key_values("a = 1\n= 2\n", "cfg.txt");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos) << e.what();
  }
}

TEST(RunConfig, TaskDefaults) {
  const auto intent = default_run_config(TaskKind::IntentDetection);
  EXPECT_EQ(intent.options.meta.generator_batch_size, 10);
  EXPECT_EQ(intent.options.meta.meta_iterations, 15);
  EXPECT_EQ(intent.options.meta.warmup_meta_iterations, 5);
  EXPECT_EQ(default_run_config(TaskKind::SlotTagging).options.meta.generator_batch_size, 50);
  EXPECT_EQ(intent.options.prompt_scheme, PromptScheme::Unconditional);
  EXPECT_EQ(intent.options.final_seed_fraction, 0.0);
}

TEST(RunConfig, UnknownKeyIsAnError) {
  EXPECT_THROW(parse_run_config({{"meta_iteratons", "3"}}), ConfigError);
}

TEST(RunConfig, BadValues) {
  EXPECT_THROW(parse_run_config({{"sample_percent", "0"}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"sample_percent", "abc"}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"workers", "0"}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"prompt_scheme", "sometimes"}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"mode", "gcn_plus_rl,nope"}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"task", "translation"}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"task", "slot"}, {"manifest", "builtin:intent"}}), ConfigError);
}

TEST(RunConfig, NewKeysParse) {
  const auto c = parse_run_config({{"prompt_scheme", "labeled"}, {"final_seed_fraction", "0.3"}, {"seeds", "4,5"},
                                   {"mode", "baseline,gcn-minus-rl"}});
  EXPECT_EQ(c.options.prompt_scheme, PromptScheme::Labeled);
  EXPECT_DOUBLE_EQ(c.options.final_seed_fraction, 0.3);
  EXPECT_EQ(c.options.meta.seeds, (std::vector<std::uint64_t>{4, 5}));
  EXPECT_EQ(c.modes, (std::vector<RunMode>{RunMode::Baseline, RunMode::GcnMinusRl}));
}

TEST(RunConfig, EchoRoundTrips) {
  auto c = parse_run_config({{"task", "slot"},
                             {"prompt_scheme", "unconditional"},
                             {"final_seed_fraction", "0.25"},
                             {"generator_learning_rate", "0.001"},
                             {"sample_percent", "2.5"},
                             {"seeds", "7,8,9"}});
  const auto text = echo_config(c);
  for (const auto& k : config_keys()) EXPECT_NE(text.find(k.name + " = "), std::string::npos) << k.name;
  const auto again = parse_run_config(parse_key_values(text));
  EXPECT_EQ(echo_config(again), text);
  EXPECT_EQ(again.task, TaskKind::SlotTagging);
  EXPECT_EQ(again.options.generator, c.options.generator);
  EXPECT_EQ(again.options.meta.seeds, c.options.meta.seeds);
}

TEST(RunConfig, FileOverridesAndRelativeManifest) {
  const auto dir = std::filesystem::temp_directory_path() / "gcn_config_file";
  std::filesystem::remove_all(dir);
  fixture::write(dir / "data", TaskKind::IntentDetection, 2, {5, 2, 2});
  std::ofstream(dir / "run.cfg") << "manifest = data/manifest.txt\nmeta_iterations = 4\nwarmup_meta_iterations = 2\n";
  const auto c = load_run_config(dir / "run.cfg", {{"meta_iterations", "6"}});
  EXPECT_EQ(c.options.meta.meta_iterations, 6);
  EXPECT_EQ(c.task, TaskKind::IntentDetection);
  EXPECT_EQ(std::filesystem::path(c.manifest), dir / "data/manifest.txt");
  const auto d = prepare_datasets(c, 1);
  EXPECT_EQ(d.full_train.size(), 25u);
  EXPECT_EQ(d.test.split, SplitTag::Test);
  std::filesystem::remove_all(dir);
}

TEST(RunConfig, BuiltinSampling) {
  auto c = parse_run_config({{"sample_percent", "1"}});
  const auto d = prepare_datasets(c, 3);
  EXPECT_EQ(d.full_train.size(), 1000u);
  EXPECT_EQ(d.seed.size(), 10u);
  EXPECT_EQ(d.seed.split, SplitTag::SeedTrain);
  // Same seed, same sample.
  const auto e = prepare_datasets(c, 3);
  ASSERT_EQ(e.seed.size(), d.seed.size());
  for (std::size_t i = 0; i < d.seed.size(); ++i) EXPECT_EQ(e.seed.examples[i].utterance, d.seed.examples[i].utterance);
}
