#pragma once

// Independent reference implementations used by the unit and acceptance tests. None of
// these call into the code under test.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "gcn/datamodel.hpp"

namespace oracle {

struct Schedule {
  int warmup_iterations = 0;
  int seed_per_batch = 0;
};

// Warmup schedule written straight from the two formulas:
//   i_w  = floor(((I_warmup - i) / I_warmup) * I_learner)
//   n_wb = floor((batch / I_warmup) * (I_warmup - i))
// clamped into [0, I_learner] and [0, batch]. Evaluated in long double, then corrected
// with exact integer comparisons so representation error cannot cross an integer.
inline Schedule schedule(int i_meta, int warmup, int learner, int batch) {
  const long long rem = warmup - i_meta;
  auto exact_floor = [&](long double approx, long long num) {
    auto q = static_cast<long long>(std::floor(approx));
    while (q * warmup > num) --q;
    while ((q + 1) * warmup <= num) ++q;
    return q;
  };
  long long iw = exact_floor(static_cast<long double>(rem) / warmup * learner, rem * learner);
  long long nb = exact_floor(static_cast<long double>(batch) / warmup * rem, rem * batch);
  auto clamp = [](long long v, long long hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
  return {static_cast<int>(clamp(iw, learner)), static_cast<int>(clamp(nb, batch))};
}

// Every assignment of one exact-match token span per value, in lexicographic order of
// (span of value 0, span of value 1, ...), spans ordered by start. The first disjoint
// assignment is returned as IOB tags; nullopt when none exists.
inline std::optional<std::vector<std::string>> brute_force_iob(
    const std::vector<std::string>& utterance,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& slots) {
  const std::size_t n = utterance.size();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> spans(slots.size());
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const auto& v = slots[k].second;
    for (std::size_t b = 0; b + v.size() <= n && !v.empty(); ++b) {
      bool eq = true;
      for (std::size_t j = 0; j < v.size(); ++j) eq = eq && utterance[b + j] == v[j];
      if (eq) spans[k].push_back({b, b + v.size()});
    }
  }
  std::vector<std::size_t> pick(slots.size(), 0);
  for (const auto& s : spans)
    if (s.empty()) return std::nullopt;
  while (true) {
    std::vector<int> owner(n, -1);
    bool ok = true;
    for (std::size_t k = 0; k < slots.size() && ok; ++k) {
      auto [b, e] = spans[k][pick[k]];
      for (std::size_t i = b; i < e; ++i) {
        if (owner[i] != -1) ok = false;
        owner[i] = static_cast<int>(k);
      }
    }
    if (ok) {
      std::vector<std::string> tags(n, "O");
      for (std::size_t k = 0; k < slots.size(); ++k) {
        auto [b, e] = spans[k][pick[k]];
        for (std::size_t i = b; i < e; ++i) tags[i] = (i == b ? "B-" : "I-") + slots[k].first;
      }
      return tags;
    }
    // Odometer increment, last slot fastest.
    std::size_t k = slots.size();
    while (k > 0) {
      --k;
      if (++pick[k] < spans[k].size()) break;
      pick[k] = 0;
      if (k == 0) return std::nullopt;
    }
    if (slots.empty()) return std::nullopt;
  }
}

// Exact-span micro F1 by explicit set intersection over (sentence, type, begin, end).
inline double span_f1(const std::vector<std::vector<std::string>>& gold,
                      const std::vector<std::vector<std::string>>& pred) {
  auto spans = [](const std::vector<std::string>& tags) {
    std::vector<std::tuple<std::string, std::size_t, std::size_t>> out;
    std::string type;
    std::size_t begin = 0;
    bool open = false;
    for (std::size_t i = 0; i <= tags.size(); ++i) {
      const std::string t = i < tags.size() ? tags[i] : "O";
      const bool inside_same = open && t.size() > 2 && t[0] == 'I' && t.substr(2) == type;
      if (inside_same) continue;
      if (open) out.emplace_back(type, begin, i);
      open = false;
      if (t.size() > 2 && (t[0] == 'B' || t[0] == 'I')) {
        open = true;
        type = t.substr(2);
        begin = i;
      }
    }
    return out;
  };
  double tp = 0, ng = 0, np = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    auto g = spans(gold[s]);
    auto p = spans(pred[s]);
    ng += static_cast<double>(g.size());
    np += static_cast<double>(p.size());
    for (const auto& x : p)
      for (const auto& y : g)
        if (x == y) tp += 1;
  }
  if (ng == 0 && np == 0) return 1.0;
  if (tp == 0) return 0.0;
  const double prec = tp / np, rec = tp / ng;
  return 2 * prec * rec / (prec + rec);
}

// Random valid examples for round-trip checks.
class ExampleFactory {
 public:
  explicit ExampleFactory(std::uint64_t seed) : rng_(seed) {}

  std::string word() {
    static const std::vector<std::string> pool{"show", "me", "flights", "from", "boston", "to", "denver", "on",
                                               "monday", "what's", "the", "weather", "in", "paris", "?", "i'm",
                                               "3.5", "café", "naïve", "x-ray", "tomorrow", "at", "noon", "!"};
    return pool[pick(pool.size())];
  }

  std::string words(std::size_t lo, std::size_t hi) {
    const std::size_t n = lo + pick(hi - lo + 1);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + word();
    return out;
  }

  gcn::LabeledExample make(gcn::TaskKind task) {
    gcn::LabeledExample e;
    e.task = task;
    switch (task) {
      case gcn::TaskKind::IntentDetection: {
        static const std::vector<std::string> intents{"flight", "airfare", "book_flight", "get_weather", "atis_flight#airfare"};
        e.label = intents[pick(intents.size())];
        e.utterance = words(1, 12);
        break;
      }
      case gcn::TaskKind::SlotTagging:
        e.label = pick(4) == 0 ? "generic" : "city " + word() + (pick(2) ? " date " + words(1, 2) : "");
        e.utterance = words(1, 12);
        break;
      case gcn::TaskKind::DialogueResponse:
        e.label = words(1, 10);
        e.utterance = words(1, 10);
        break;
    }
    return e;
  }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace oracle
