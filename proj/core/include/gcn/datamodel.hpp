#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gcn {

enum class TaskKind { IntentDetection, SlotTagging, DialogueResponse };

std::string_view to_string(TaskKind task);
// Accepts "intent", "slot", "dialogue" and the enumerator spellings; throws std::invalid_argument.
TaskKind parse_task_kind(std::string_view text);

// Label used for slot-tagging examples that carry no slots.
inline constexpr std::string_view kNoSlotsLabel = "generic";

struct SeparatorSet {
  std::string bos = "<BOS>";
  std::string go = "<GO>";
  std::string eos = "<EOS>";

  // Throws std::invalid_argument unless the three tokens are non-empty, distinct,
  // whitespace-free and none is a substring of another.
  void validate() const;
  bool contains_separator(std::string_view text) const;

  bool operator==(const SeparatorSet&) const = default;
};

struct LabeledExample {
  std::string label;
  std::string utterance;
  std::optional<std::vector<std::string>> iob_tags;
  TaskKind task = TaskKind::IntentDetection;

  bool operator==(const LabeledExample&) const = default;
};

enum class ViolationCode {
  EmptyUtterance,
  EmptyLabel,
  TagLengthMismatch,
  MalformedTag,
  DanglingInside,
  SeparatorInLabel,
  SeparatorInUtterance,
  TagsOnNonSlotTask,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string detail;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationCode code) const;
};

// Reports every violated invariant. Never throws.
ValidationResult validate_example(const LabeledExample& example,
                                  const SeparatorSet& separators = SeparatorSet{});

// Left-to-right IOB scan: tags are O, B-x or I-x and every I-x follows B-x or I-x of the same x.
bool is_well_formed_iob(const std::vector<std::string>& tags);

// Per-datapoint reward decomposition.
struct RewardRecord {
  double p_meta = 0.0;
  double p_d = 0.0;
  double r_d = 0.0;
  double kl_term = 0.0;
  double final_reward = 0.0;
};

// One generator sample. Token ids belong to the generator backend's vocabulary.
struct GeneratedDatapoint {
  std::uint64_t id = 0;
  std::string raw_text;
  std::vector<int> prompt_tokens;
  std::vector<int> generated_tokens;
  std::optional<LabeledExample> parsed;
  // Set when parsing failed (machine-readable malformation reason) or when a parsed
  // example could not be used (slot alignment failure, label outside the label space).
  std::optional<std::string> rejection;
  std::vector<double> token_logprobs_policy;
  std::vector<double> token_logprobs_reference;
  std::optional<RewardRecord> reward;
  int meta_iteration = 0;

  bool usable() const { return parsed.has_value() && !rejection.has_value(); }
};

struct MetaConfig {
  int meta_iterations = 15;
  int learner_iterations_per_meta = 100;
  int warmup_meta_iterations = 5;
  int generator_batch_size = 10;
  double performance_threshold = 1.0;
  double alpha = 0.5;
  std::vector<std::uint64_t> seeds{1};

  // Throws std::invalid_argument on the first broken invariant.
  void validate() const;

  // Paper-scale defaults per task: batch 10 for intents, 50 for slots; warmup = meta/3.
  static MetaConfig defaults_for(TaskKind task);
};

}  // namespace gcn
