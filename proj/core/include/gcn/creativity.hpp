#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace gcn {

struct CreativityReport {
  double seed_em = 0.0;
  double train_em = 0.0;
  double self_bleu = 0.0;
  double oov_rate = 0.0;
  std::size_t vocab_size = 0;

  bool operator==(const CreativityReport&) const = default;
};

// Lowercase, collapse whitespace, strip trailing punctuation.
std::string em_normalize(std::string_view text);

// Fraction of generated utterances whose normalized text occurs in `reference`.
// Throws std::invalid_argument for an empty generated list.
double exact_match_rate(const std::vector<std::string>& generated, const std::vector<std::string>& reference);

// Sentence BLEU-4 with uniform weights. Add-one smoothing on the 2..4-gram precisions,
// zero when no unigram matches; brevity penalty uses the closest reference length
// (shorter on ties).
double sentence_bleu(const std::vector<std::vector<std::string>>& references, const std::vector<std::string>& hypothesis);

// Mean sentence BLEU of each utterance against all the others. Needs >= 2 utterances.
double self_bleu(const std::vector<std::string>& generated);

struct OovVocab {
  double oov_rate = 0.0;
  std::size_t vocab_size = 0;
};

// Type-level: |types(generated) \ types(reference)| / |types(generated)|.
OovVocab oov_and_vocab(const std::vector<std::string>& generated, const std::vector<std::string>& reference);

// Everything at once. Self-BLEU is 0 when fewer than two utterances were generated.
CreativityReport analyze(const std::vector<std::string>& generated, const std::vector<std::string>& seed,
                         const std::vector<std::string>& train, const std::vector<std::string>& test);

// Seed EM, Train EM, Self-BLEU per condition.
std::string creativity_csv_header();
std::string creativity_csv_row(std::string_view condition, const CreativityReport& report);

}  // namespace gcn
