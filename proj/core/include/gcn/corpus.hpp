#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gcn/datamodel.hpp"

namespace gcn {

enum class SplitTag { SeedTrain, Validation, Test };

std::string_view to_string(SplitTag split);

struct Corpus {
  TaskKind task = TaskKind::IntentDetection;
  SplitTag split = SplitTag::SeedTrain;
  std::vector<LabeledExample> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Maps raw dataset slot names to the phrases used in generator labels.
// Names without an explicit mapping use slot_name_to_phrase().
class SlotPhraseMap {
 public:
  SlotPhraseMap() = default;
  explicit SlotPhraseMap(std::map<std::string, std::string> overrides) : overrides_(std::move(overrides)) {}

  std::string phrase(std::string_view slot_name) const;
  const std::map<std::string, std::string>& overrides() const { return overrides_; }

 private:
  std::map<std::string, std::string> overrides_;
};

// Key-value manifest:
//   task = intent | slot | dialogue
//   train = path, validation = path (optional), test = path
//   slot.<raw_name> = phrase
// Relative paths resolve against the manifest's directory.
struct DatasetManifest {
  TaskKind task = TaskKind::IntentDetection;
  std::filesystem::path train;
  std::optional<std::filesystem::path> validation;
  std::filesystem::path test;
  SlotPhraseMap slot_phrases;

  static DatasetManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// JSON-lines loaders. Errors name the line number and field, or the offending record.
Corpus parse_jsonl(std::string_view text, TaskKind task, SplitTag split, const SlotPhraseMap& phrases = {},
                   std::string_view source = "<text>");
Corpus load(const std::filesystem::path& path, TaskKind task, SplitTag split = SplitTag::SeedTrain,
            const SlotPhraseMap& phrases = {});

// One JSON record per example, in the external schema (slot names are tag types).
std::string to_jsonl(const Corpus& corpus);
void write_jsonl(const Corpus& corpus, const std::filesystem::path& path);

// Entity types present in a slot example's IOB tags.
std::set<std::string> slot_types(const LabeledExample& example);
// Known slot phrases of a corpus (tag types with '_' read back as spaces).
std::set<std::string> slot_phrases(const Corpus& corpus);

// Stratification class: intent, sorted slot-type signature, or response-length bucket.
std::string stratification_class(const LabeledExample& example);

struct SampleSpec {
  double fraction = 100.0;  // percent, in (0, 100]
  std::uint64_t rng_seed = 0;
  std::size_t min_per_class = 1;
};

struct ClassCount {
  std::string cls;
  std::size_t available = 0;
  std::size_t drawn = 0;
  bool min_rule_bound = false;
};

struct SampleResult {
  Corpus corpus;
  std::vector<ClassCount> classes;
  bool min_rule_bound = false;  // the per-class minimum dominated at least one class
};

// Class-stratified draw without replacement. Per class: max(min_per_class,
// round_half_up(fraction * n_k / 100)). Slot corpora first secure one example per slot
// type with a greedy cover. Output keeps the input order. Test corpora are rejected.
SampleResult stratified_sample(const Corpus& corpus, const SampleSpec& spec);

// Class-stratified random partition into (SeedTrain, Validation).
std::pair<Corpus, Corpus> split(const Corpus& corpus, double train_fraction, std::uint64_t rng_seed);

// Drops classes with fewer than `min_count` examples (e.g. rare ATIS intents).
Corpus remove_rare_classes(const Corpus& corpus, std::size_t min_count);

std::size_t round_half_up(double x);

}  // namespace gcn
