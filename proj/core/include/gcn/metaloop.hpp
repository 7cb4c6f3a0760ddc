#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gcn/corpus.hpp"
#include "gcn/creativity.hpp"
#include "gcn/curriculum.hpp"
#include "gcn/datamodel.hpp"
#include "gcn/generator.hpp"
#include "gcn/learner.hpp"
#include "gcn/reward.hpp"
#include "gcn/run_log.hpp"
#include "gcn/tiny_lm.hpp"

namespace gcn {

enum class RunMode { Baseline, GcnMinusRl, GcnPlusRl };

std::string_view to_string(RunMode mode);
// Accepts "baseline", "gcn_minus_rl", "gcn_plus_rl" (any case, '-' or '_').
RunMode parse_run_mode(std::string_view text);

struct MetaIterationRecord {
  int i_meta = 0;
  double p_meta = 0.0;
  double mean_reward = 0.0;
  double mean_r_d = 0.0;
  double mean_kl = 0.0;
  double beta = 0.0;
  double seed_fraction = 0.0;  // share of seed examples among all learner training examples
  std::size_t generated = 0;
  double parse_rate = 0.0;
  double usable_rate = 0.0;
  int learner_iterations = 0;
  double final_learner_loss = 0.0;
  std::size_t trainable_groups = 0;
  double clip_fraction = 0.0;
  bool ppo_aborted = false;

  bool operator==(const MetaIterationRecord&) const = default;
};

struct FinalReport {
  RunMode mode = RunMode::Baseline;
  std::uint64_t seed = 0;
  TaskKind task = TaskKind::IntentDetection;
  std::string metric_name;
  double test_metric = 0.0;
  std::vector<MetaIterationRecord> history;
  bool early_stopped = false;
  double best_p_meta = 0.0;
  std::optional<CreativityReport> creativity;  // absent for baseline
  std::size_t final_dataset_size = 0;
  double final_parse_rate = 0.0;
  double final_usable_rate = 0.0;
  bool degenerate = false;
  std::vector<std::string> final_utterances;  // parsed utterances of the final dataset
  double seconds = 0.0;
};

// Unconditional sampling lets the generator pick labels; Labeled cycles the intent labels
// through "<BOS> label <GO>" prompts (intent detection only).
enum class PromptScheme { Unconditional, Labeled };
std::string_view to_string(PromptScheme s);
PromptScheme parse_prompt_scheme(const std::string& s);

struct RunOptions {
  MetaConfig meta;
  RunMode mode = RunMode::GcnPlusRl;
  std::uint64_t seed = 1;
  GeneratorConfig generator;
  TinyLMConfig tiny_lm;
  LearnerConfig learner;
  KLController controller;
  SeparatorSet separators;
  // Top-up rounds when a meta-iteration's usable datapoints fall short of the curriculum demand.
  int max_generation_rounds = 3;
  PromptScheme prompt_scheme = PromptScheme::Unconditional;
  // Share of each final-learner batch drawn from the seed; 0 trains on generated data only.
  double final_seed_fraction = 0.0;

  // Run directory; events.jsonl and rewards.jsonl are appended, checkpoints written per meta-iteration.
  std::optional<std::filesystem::path> run_dir;
  bool write_checkpoints = true;
  bool resume = false;

  // Plugin points. Empty means TinyLM / the built-in learners.
  std::function<std::unique_ptr<LanguageModelBackend>(const Corpus& seed)> backend_factory;
  LearnerFactory learner_factory;

  // Called with every composed learner batch (i_meta is -1 for baseline and final learners).
  std::function<void(int i_meta, int learner_iter, const CurriculumPlan&, const Batch&)> batch_observer;
};

// Stream ids for derive_seed(run seed, stream, index).
enum class Stream : std::uint64_t { Pretrain = 1, Generate, Curriculum, Learner, Ppo, FinalGenerate, FinalCurriculum, FinalLearner, Baseline };

std::string checkpoint_tag(RunMode mode, std::uint64_t seed);

// One mode, one seed. `full_train` (defaults to seed) is the exact-match reference for train EM.
FinalReport run(const RunOptions& options, const Corpus& seed, const Corpus& validation, const Corpus& test,
                const Corpus* full_train = nullptr);

// Train a fresh learner on a generated dataset (mixed with the seed per final_seed_fraction)
// and evaluate on test. Exposed for the CLI evaluate command and tests.
struct FinalEvaluation {
  double test_metric = 0.0;
  std::size_t dataset_size = 0;
  double parse_rate = 0.0;
  double usable_rate = 0.0;
  bool degenerate = false;
  std::vector<std::string> utterances;
};
FinalEvaluation final_evaluation(const RunOptions& options, const Generator& generator, const LabelSpace& labels,
                                 const Corpus& seed, const Corpus& test);

std::string metric_name(TaskKind task);

// Datapoints the curriculum consumes in one meta-iteration.
std::size_t generated_demand(const CurriculumPlan& plan);

}  // namespace gcn
