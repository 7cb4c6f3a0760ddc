#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcn/rng.hpp"

namespace gcn {

struct SamplerConfig {
  double temperature = 1.0;
  int top_k = 50;      // 0 disables
  double top_p = 1.0;  // 1 disables
  int max_new_tokens = 64;

  bool operator==(const SamplerConfig&) const = default;
};

struct Sample {
  std::vector<int> tokens;
  // Log-probability of each sampled token under the model's untempered distribution.
  std::vector<double> logprobs;
  bool stopped_at_eos = false;
};

struct SequenceScores {
  std::vector<double> logprobs;  // one per continuation token
  std::vector<double> values;    // value-head outputs, empty without a value head
};

// Token-level autoregressive model used as the data generator. Parameter groups are
// indexed from the output side: group 0 is adjacent to the output layer. Const methods
// are safe to call concurrently.
class LanguageModelBackend {
 public:
  virtual ~LanguageModelBackend() = default;

  virtual std::string backend_name() const = 0;
  virtual std::vector<int> tokenize(std::string_view text) const = 0;
  virtual std::string detokenize(std::span<const int> tokens) const = 0;
  virtual int vocab_size() const = 0;
  virtual int eos_token() const = 0;

  virtual Sample sample(std::span<const int> prompt, const SamplerConfig& sampler, Rng& rng) const = 0;
  virtual SequenceScores score(std::span<const int> prompt, std::span<const int> continuation) const = 0;

  // One optimizer step of next-token cross-entropy over every position of each sequence.
  // Returns the mean per-token loss before the step.
  virtual double train_supervised(const std::vector<std::vector<int>>& batch, double learning_rate) = 0;

  // Gradient accumulation for policy-gradient updates: adds the gradient of
  // sum_t dlogprob[t] * logprob_t + sum_t dvalue[t] * value_t (dvalue may be empty).
  virtual void accumulate_gradient(std::span<const int> prompt, std::span<const int> continuation,
                                   std::span<const double> dlogprob, std::span<const double> dvalue) = 0;
  // theta <- theta - learning_rate * grad on trainable groups; clears the accumulator.
  virtual void apply_sgd(double learning_rate) = 0;
  virtual void zero_grad() = 0;
  virtual bool has_value_head() const = 0;

  virtual std::unique_ptr<LanguageModelBackend> clone() const = 0;

  virtual std::size_t parameter_group_count() const = 0;
  virtual std::string parameter_group_name(std::size_t group) const = 0;
  // The `count` groups nearest the output are trainable, the rest frozen.
  virtual void set_trainable_groups(std::size_t count) = 0;
  virtual std::size_t trainable_groups() const = 0;
  virtual std::vector<double> parameter_group_values(std::size_t group) const = 0;
  virtual std::size_t parameter_count() const = 0;

  virtual void save(const std::filesystem::path& dir) const = 0;
};

using BackendLoader = std::function<std::unique_ptr<LanguageModelBackend>(const std::filesystem::path&)>;

// Plugin point for other backends (e.g. a pretrained transformer). "tiny_lm" is built in.
void register_backend(const std::string& name, BackendLoader loader);
// Reads <dir>/backend.json to pick the loader.
std::unique_ptr<LanguageModelBackend> load_backend(const std::filesystem::path& dir);

}  // namespace gcn
