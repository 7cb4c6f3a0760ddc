#include "gcn/creativity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "gcn/text.hpp"

namespace gcn {

namespace {

std::vector<std::string> bleu_tokens(std::string_view text) { return tokenize(normalize_text(text)); }

std::string ngram_key(const std::vector<std::string>& toks, std::size_t i, std::size_t n) {
  std::string k;
  for (std::size_t j = 0; j < n; ++j) {
    if (j) k += '\x1f';
    k += toks[i + j];
  }
  return k;
}

using Counts = std::unordered_map<std::string, int>;

Counts ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
  Counts c;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) ++c[ngram_key(toks, i, n)];
  return c;
}

// Combines clipped counts into the smoothed, brevity-penalized score.
double bleu_from_counts(const long long num[4], const long long den[4], std::size_t hyp_len, std::size_t ref_len) {
  if (num[0] == 0) return 0.0;
  double bp = 1.0;
  if (hyp_len == 0) {
    bp = 0.0;
  } else if (hyp_len <= ref_len) {
    bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  }
  double s = 0.0;
  for (int n = 0; n < 4; ++n) {
    const double nn = static_cast<double>(n == 0 ? num[n] : num[n] + 1);
    const double dd = static_cast<double>(n == 0 ? den[n] : den[n] + 1);
    if (nn > 0.0) s += 0.25 * std::log(nn / dd);
  }
  return bp * std::exp(s);
}

std::size_t closest_length(const std::vector<std::size_t>& lengths, std::size_t hyp_len) {
  std::size_t best = lengths.front();
  auto dist = [&](std::size_t r) { return r > hyp_len ? r - hyp_len : hyp_len - r; };
  for (std::size_t r : lengths) {
    if (dist(r) < dist(best) || (dist(r) == dist(best) && r < best)) best = r;
  }
  return best;
}

}  // namespace

std::string em_normalize(std::string_view text) {
  std::string s = normalize_text(text);
  while (!s.empty()) {
    const unsigned char c = static_cast<unsigned char>(s.back());
    if (std::ispunct(c) || std::isspace(c)) {
      s.pop_back();
    } else {
      break;
    }
  }
  return s;
}

double exact_match_rate(const std::vector<std::string>& generated, const std::vector<std::string>& reference) {
  if (generated.empty()) throw std::invalid_argument("exact_match_rate: empty generated list");
  std::set<std::string> ref;
  for (const auto& r : reference) ref.insert(em_normalize(r));
  std::size_t hits = 0;
  for (const auto& g : generated) hits += ref.count(em_normalize(g));
  return static_cast<double>(hits) / static_cast<double>(generated.size());
}

double sentence_bleu(const std::vector<std::vector<std::string>>& references, const std::vector<std::string>& hyp) {
  if (references.empty()) throw std::invalid_argument("sentence_bleu: no references");
  long long num[4] = {0, 0, 0, 0}, den[4] = {0, 0, 0, 0};
  for (std::size_t n = 1; n <= 4; ++n) {
    const Counts hc = ngram_counts(hyp, n);
    Counts max_ref;
    for (const auto& r : references) {
      for (const auto& [k, c] : ngram_counts(r, n)) {
        int& m = max_ref[k];
        m = std::max(m, c);
      }
    }
    long long total = 0;
    for (const auto& [k, c] : hc) {
      total += c;
      auto it = max_ref.find(k);
      if (it != max_ref.end()) num[n - 1] += std::min(c, it->second);
    }
    den[n - 1] = std::max<long long>(1, total);
  }
  std::vector<std::size_t> lengths;
  for (const auto& r : references) lengths.push_back(r.size());
  return bleu_from_counts(num, den, hyp.size(), closest_length(lengths, hyp.size()));
}

double self_bleu(const std::vector<std::string>& generated) {
  const std::size_t N = generated.size();
  if (N < 2) throw std::invalid_argument("self_bleu needs at least two utterances");
  std::vector<std::vector<std::string>> toks;
  toks.reserve(N);
  for (const auto& g : generated) toks.push_back(bleu_tokens(g));

  // For every n-gram keep the two largest per-utterance counts so that the clipping
  // maximum over "all utterances but i" is available in constant time.
  struct Top2 {
    int c1 = 0, c2 = 0;
    std::size_t owner1 = SIZE_MAX;
  };
  std::vector<std::vector<Counts>> counts(4, std::vector<Counts>(N));
  std::vector<std::unordered_map<std::string, Top2>> top(4);
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t i = 0; i < N; ++i) {
      counts[n - 1][i] = ngram_counts(toks[i], n);
      for (const auto& [k, c] : counts[n - 1][i]) {
        Top2& t = top[n - 1][k];
        if (c > t.c1) {
          t.c2 = t.c1;
          t.c1 = c;
          t.owner1 = i;
        } else if (c > t.c2) {
          t.c2 = c;
        }
      }
    }
  }
  std::map<std::size_t, std::size_t> length_counts;
  for (const auto& t : toks) ++length_counts[t.size()];

  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    long long num[4] = {0, 0, 0, 0}, den[4] = {0, 0, 0, 0};
    for (std::size_t n = 0; n < 4; ++n) {
      long long tot = 0;
      for (const auto& [k, c] : counts[n][i]) {
        tot += c;
        const Top2& t = top[n].at(k);
        const int other = t.owner1 == i ? t.c2 : t.c1;
        num[n] += std::min(c, other);
      }
      den[n] = std::max<long long>(1, tot);
    }
    // Closest reference length among the others.
    const std::size_t h = toks[i].size();
    if (--length_counts[h] == 0) length_counts.erase(h);
    std::size_t best = 0;
    bool have = false;
    auto consider = [&](std::size_t r) {
      auto dist = [&](std::size_t x) { return x > h ? x - h : h - x; };
      if (!have || dist(r) < dist(best) || (dist(r) == dist(best) && r < best)) {
        best = r;
        have = true;
      }
    };
    auto it = length_counts.lower_bound(h);
    if (it != length_counts.end()) consider(it->first);
    if (it != length_counts.begin()) consider(std::prev(it)->first);
    ++length_counts[h];
    total += bleu_from_counts(num, den, h, best);
  }
  return total / static_cast<double>(N);
}

OovVocab oov_and_vocab(const std::vector<std::string>& generated, const std::vector<std::string>& reference) {
  if (generated.empty()) throw std::invalid_argument("oov_and_vocab: empty generated list");
  std::set<std::string> gen, ref;
  for (const auto& g : generated)
    for (auto& t : bleu_tokens(g)) gen.insert(std::move(t));
  for (const auto& r : reference)
    for (auto& t : bleu_tokens(r)) ref.insert(std::move(t));
  OovVocab out;
  out.vocab_size = gen.size();
  if (gen.empty()) return out;
  std::size_t novel = 0;
  for (const auto& t : gen) novel += ref.count(t) ? 0 : 1;
  out.oov_rate = static_cast<double>(novel) / static_cast<double>(gen.size());
  return out;
}

CreativityReport analyze(const std::vector<std::string>& generated, const std::vector<std::string>& seed,
                         const std::vector<std::string>& train, const std::vector<std::string>& test) {
  CreativityReport r;
  r.seed_em = exact_match_rate(generated, seed);
  r.train_em = exact_match_rate(generated, train);
  r.self_bleu = generated.size() >= 2 ? self_bleu(generated) : 0.0;
  const auto ov = oov_and_vocab(generated, test);
  r.oov_rate = ov.oov_rate;
  r.vocab_size = ov.vocab_size;
  return r;
}

std::string creativity_csv_header() { return "condition,seed_em,train_em,self_bleu"; }

std::string creativity_csv_row(std::string_view condition, const CreativityReport& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f", r.seed_em, r.train_em, r.self_bleu);
  return std::string(condition) + buf;
}

}  // namespace gcn
