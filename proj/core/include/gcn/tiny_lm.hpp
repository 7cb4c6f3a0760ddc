#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gcn/datamodel.hpp"
#include "gcn/lm_backend.hpp"

namespace gcn {

struct TinyLMConfig {
  int embedding_dim = 16;
  int context_window = 4;
  int hidden_dim = 64;
  bool value_head = false;
  double init_scale = 0.1;
  std::uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  bool operator==(const TinyLMConfig&) const = default;
};

// Word-level vocabulary with atomic special tokens. Id 0 is the unknown token.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> tokens, std::vector<std::string> specials);

  // Specials from the separators, words from the whitespace+punctuation tokenizer.
  static Vocabulary build(const std::vector<std::string>& texts, const SeparatorSet& separators);

  int id(const std::string& token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::string>& specials() const { return specials_; }

  std::vector<int> encode(std::string_view text) const;
  std::string decode(std::span<const int> ids) const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::string> specials_;
  std::map<std::string, int> index_;
};

inline constexpr const char* kUnknownToken = "<UNK>";

// Two tanh hidden layers over [window embeddings ; running mean of prefix embeddings].
// Parameter groups from the output side: output (+ value head), hidden2, hidden1, embeddings.
class TinyLM final : public LanguageModelBackend {
 public:
  TinyLM(Vocabulary vocabulary, int eos_token, TinyLMConfig config);

  std::string backend_name() const override { return "tiny_lm"; }
  std::vector<int> tokenize(std::string_view text) const override { return vocab_.encode(text); }
  std::string detokenize(std::span<const int> tokens) const override { return vocab_.decode(tokens); }
  int vocab_size() const override { return vocab_.size(); }
  int eos_token() const override { return eos_; }

  Sample sample(std::span<const int> prompt, const SamplerConfig& sampler, Rng& rng) const override;
  SequenceScores score(std::span<const int> prompt, std::span<const int> continuation) const override;
  double train_supervised(const std::vector<std::vector<int>>& batch, double learning_rate) override;
  void accumulate_gradient(std::span<const int> prompt, std::span<const int> continuation,
                           std::span<const double> dlogprob, std::span<const double> dvalue) override;
  void apply_sgd(double learning_rate) override;
  void zero_grad() override;
  bool has_value_head() const override { return config_.value_head; }

  std::unique_ptr<LanguageModelBackend> clone() const override;

  std::size_t parameter_group_count() const override { return 4; }
  std::string parameter_group_name(std::size_t group) const override;
  void set_trainable_groups(std::size_t count) override;
  std::size_t trainable_groups() const override { return trainable_; }
  std::vector<double> parameter_group_values(std::size_t group) const override;
  std::size_t parameter_count() const override { return params_.size(); }

  void save(const std::filesystem::path& dir) const override;
  static std::unique_ptr<TinyLM> load(const std::filesystem::path& dir);

  const Vocabulary& vocabulary() const { return vocab_; }
  const TinyLMConfig& config() const { return config_; }

  // Full next-token distribution after `prefix` (log-probabilities), for tests.
  std::vector<double> next_token_logprobs(std::span<const int> prefix) const;

 private:
  struct Activations;

  void init_layout();
  void forward_position(std::span<const int> seq, std::size_t t, const std::vector<double>& bag_sum,
                        Activations& act) const;
  void forward_sequence(std::span<const int> seq, std::size_t first, std::vector<Activations>& acts) const;
  void backward_sequence(std::span<const int> seq, std::size_t first, const std::vector<Activations>& acts,
                         std::span<const std::vector<double>> dlogits, std::span<const double> dvalue);
  std::size_t group_begin(std::size_t group) const;
  std::size_t group_end(std::size_t group) const;

  Vocabulary vocab_;
  int eos_ = 0;
  TinyLMConfig config_;
  std::size_t trainable_ = 4;

  // Offsets into params_.
  std::size_t off_embed_ = 0, off_bag_ = 0, off_w1_ = 0, off_b1_ = 0, off_w2_ = 0, off_b2_ = 0, off_wo_ = 0,
              off_bo_ = 0, off_wv_ = 0, off_bv_ = 0, total_ = 0;
  int input_dim_ = 0;

  std::vector<double> params_;
  std::vector<double> grad_;
  std::vector<double> adam_m_;
  std::vector<double> adam_v_;
  long long adam_step_ = 0;
};

}  // namespace gcn
