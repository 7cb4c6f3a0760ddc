#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gcn/corpus.hpp"
#include "gcn/datamodel.hpp"
#include "gcn/hygiene.hpp"

namespace gcn {

// What a learner can output: the intent set, the slot tag types, or the response vocabulary.
struct LabelSpace {
  TaskKind task = TaskKind::IntentDetection;
  std::vector<std::string> intents;     // sorted
  std::vector<std::string> slot_types;  // sorted tag types (B-/I- suffixes)
  std::vector<std::string> vocabulary;  // sorted response tokens

  static LabelSpace from_corpus(const Corpus& corpus);

  // "O" followed by B-x, I-x for each slot type.
  std::vector<std::string> tag_set() const;
  // Output width of the task head: intents, 2S+1 tags, or vocabulary + unknown + end.
  std::size_t output_size() const;
  // False when a labeled example cannot be trained on (unknown intent or tag type).
  bool admits(const LabeledExample& example) const;
};

struct LearnerConfig {
  double learning_rate = 0.0;  // 0 picks the per-task default
  int hash_buckets = 4096;
  int embedding_dim = 16;
  int hidden_dim = 32;
  double init_scale = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int max_response_tokens = 24;

  bool operator==(const LearnerConfig&) const = default;
};

// 3e-3 for intents, 1e-4 for slots and dialogue.
double default_learning_rate(TaskKind task);

class LearnerAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Evaluation {
  double metric = 0.0;              // accuracy, span micro-F1, or exp(-mean token loss)
  std::vector<double> per_example;  // 1/0, token F1, or exp(-example token loss)
};

class LearnerBackend {
 public:
  virtual ~LearnerBackend() = default;

  virtual TaskKind task() const = 0;
  virtual const LabelSpace& label_space() const = 0;
  virtual std::size_t parameter_count() const = 0;

  // One optimizer step; returns the mean loss before the step. Throws LearnerAbort on a
  // non-finite loss and std::invalid_argument for examples outside the label space.
  virtual double train_step(const std::vector<LabeledExample>& batch) = 0;

  virtual std::string predict_label(std::string_view utterance) const;
  virtual std::vector<std::string> predict_tags(std::string_view utterance) const;
  virtual std::string predict_response(std::string_view context) const;

  // Score in [0,1] for one labeled example.
  virtual double datapoint_performance(const LabeledExample& example) const = 0;

  // Throws std::invalid_argument on an empty corpus; hygiene-checked with `who`.
  Evaluation evaluate(const Corpus& corpus,
                      hygiene::Component who = hygiene::Component::LearnerEvaluation) const;

 protected:
  virtual Evaluation evaluate_examples(const std::vector<LabeledExample>& examples) const = 0;
};

using LearnerFactory = std::function<std::unique_ptr<LearnerBackend>(const LabelSpace&, std::uint64_t seed,
                                                                      const LearnerConfig&)>;

// Built-in desk-scale learners: hashed bag-of-embeddings classifier, windowed tagger,
// and a context-conditioned next-token responder.
std::unique_ptr<LearnerBackend> spawn(const LabelSpace& labels, std::uint64_t seed,
                                      const LearnerConfig& config = LearnerConfig{});

struct TrainingResult {
  std::vector<double> loss_curve;
  int iterations_used = 0;
};

// Consumes up to `budget` batches from `next_batch` (std::nullopt ends the stream early).
TrainingResult train(LearnerBackend& learner,
                     const std::function<std::optional<std::vector<LabeledExample>>(int iteration)>& next_batch,
                     int budget);

struct LearnerReport {
  double p_meta = 0.0;
  std::map<std::uint64_t, double> per_datapoint;
  std::vector<double> train_loss_curve;
  int iterations_used = 0;
};

struct TagSpan {
  std::string type;
  std::size_t begin = 0;  // token index, inclusive
  std::size_t end = 0;    // exclusive

  bool operator==(const TagSpan&) const = default;
  auto operator<=>(const TagSpan&) const = default;
};

// conlleval-style chunking: a span starts at B-x, or at I-x not continuing an x span.
std::vector<TagSpan> extract_spans(const std::vector<std::string>& tags);

// Micro-averaged exact-span F1 over sentence pairs; 1 when neither side has any span.
double span_f1(const std::vector<std::vector<std::string>>& gold, const std::vector<std::vector<std::string>>& predicted);

}  // namespace gcn
