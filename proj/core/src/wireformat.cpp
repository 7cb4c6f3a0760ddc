#include "gcn/wireformat.hpp"

#include <algorithm>
#include <functional>
#include <optional>

#include "gcn/text.hpp"

namespace gcn {

std::string serialize(const LabeledExample& e, const SeparatorSet& s) {
  if (s.contains_separator(e.label)) throw FormatError("label contains a reserved separator");
  if (s.contains_separator(e.utterance)) throw FormatError("utterance contains a reserved separator");
  std::string label(trim(e.label));
  if (label.empty() && e.task == TaskKind::SlotTagging) label = kNoSlotsLabel;
  std::string out;
  out.reserve(label.size() + e.utterance.size() + s.bos.size() + s.go.size() + s.eos.size() + 4);
  out.append(s.bos).append(" ").append(label).append(" ").append(s.go).append(" ");
  out.append(e.utterance).append(" ").append(s.eos);
  return out;
}

std::string_view to_string(MalformedReason r) {
  switch (r) {
    case MalformedReason::MissingBos:
      return "missing_bos";
    case MalformedReason::MissingGo:
      return "missing_go";
    case MalformedReason::MissingEos:
      return "missing_eos";
    case MalformedReason::EmptyLabel:
      return "empty_label";
    case MalformedReason::EmptyUtterance:
      return "empty_utterance";
    case MalformedReason::OutOfOrder:
      return "out_of_order";
  }
  return "unknown";
}

ParseResult parse(std::string_view raw, const SeparatorSet& s, TaskKind task) {
  const auto bos = raw.find(s.bos);
  if (bos == std::string_view::npos) return Malformed{MalformedReason::MissingBos};
  const auto go_any = raw.find(s.go);
  if (go_any == std::string_view::npos) return Malformed{MalformedReason::MissingGo};
  const auto eos_any = raw.find(s.eos);
  if (eos_any == std::string_view::npos) return Malformed{MalformedReason::MissingEos};

  const auto go = raw.find(s.go, bos + s.bos.size());
  if (go == std::string_view::npos) return Malformed{MalformedReason::OutOfOrder};
  const auto eos = raw.find(s.eos, go + s.go.size());
  if (eos == std::string_view::npos) return Malformed{MalformedReason::OutOfOrder};

  const auto label_text = raw.substr(bos + s.bos.size(), go - bos - s.bos.size());
  const auto utterance_text = raw.substr(go + s.go.size(), eos - go - s.go.size());
  // A stray separator inside a span means the markers interleave.
  if (s.contains_separator(label_text) || s.contains_separator(utterance_text))
    return Malformed{MalformedReason::OutOfOrder};

  LabeledExample e;
  e.task = task;
  e.label = std::string(trim(label_text));
  e.utterance = std::string(trim(utterance_text));
  if (e.label.empty()) {
    if (task != TaskKind::SlotTagging) return Malformed{MalformedReason::EmptyLabel};
    e.label = kNoSlotsLabel;
  }
  if (e.utterance.empty()) return Malformed{MalformedReason::EmptyUtterance};
  return e;
}

std::string slot_name_to_phrase(std::string_view slot_name) {
  std::string out;
  for (char c : slot_name) out.push_back(c == '_' || c == '.' || c == '-' ? ' ' : c);
  return join(split_whitespace(normalize_text(out)));
}

std::string phrase_to_tag_type(std::string_view phrase) { return join(split_whitespace(phrase), "_"); }

std::string make_slot_label(const std::vector<std::pair<std::string, std::string>>& pairs) {
  if (pairs.empty()) return std::string(kNoSlotsLabel);
  std::vector<std::string> parts;
  for (const auto& [name, value] : pairs) {
    parts.push_back(name);
    parts.push_back(value);
  }
  return join(parts);
}

std::variant<std::vector<std::pair<std::string, std::string>>, SlotLabelError> parse_slot_label(
    std::string_view label, const std::set<std::string>& known) {
  std::vector<std::pair<std::string, std::string>> pairs;
  const auto words = split_whitespace(label);
  if (words.empty() || (words.size() == 1 && words[0] == kNoSlotsLabel)) return pairs;

  std::vector<std::vector<std::string>> names;
  for (const auto& k : known) names.push_back(split_whitespace(k));

  auto match_at = [&](std::size_t pos) -> std::size_t {
    std::size_t best = 0;
    for (const auto& n : names) {
      if (n.empty() || n.size() <= best || pos + n.size() > words.size()) continue;
      if (std::equal(n.begin(), n.end(), words.begin() + static_cast<std::ptrdiff_t>(pos))) best = n.size();
    }
    return best;
  };

  std::size_t pos = 0;
  while (pos < words.size()) {
    const std::size_t name_len = match_at(pos);
    if (name_len == 0) {
      return SlotLabelError{words[pos], pairs.empty() ? "label does not start with a known slot name"
                                                      : "unexpected token"};
    }
    std::vector<std::string> name(words.begin() + static_cast<std::ptrdiff_t>(pos),
                                  words.begin() + static_cast<std::ptrdiff_t>(pos + name_len));
    pos += name_len;
    std::vector<std::string> value;
    while (pos < words.size() && match_at(pos) == 0) value.push_back(words[pos++]);
    if (value.empty()) return SlotLabelError{join(name), "slot has no value"};
    pairs.emplace_back(join(name), join(value));
  }
  return pairs;
}

namespace {

std::string fold(std::string_view token) {
  std::string out;
  for (const auto& t : tokenize(normalize_text(token))) {
    if (!is_punctuation_token(t)) out += t;
  }
  return out;
}

std::vector<TokenSpan> exact_matches(const std::vector<std::string>& u, const std::vector<std::string>& v) {
  std::vector<TokenSpan> out;
  if (v.empty() || v.size() > u.size()) return out;
  for (std::size_t i = 0; i + v.size() <= u.size(); ++i) {
    if (std::equal(v.begin(), v.end(), u.begin() + static_cast<std::ptrdiff_t>(i))) out.push_back({i, i + v.size()});
  }
  return out;
}

// Matches over folded tokens, skipping punctuation-only tokens on both sides.
std::vector<TokenSpan> folded_matches(const std::vector<std::string>& u, const std::vector<std::string>& v) {
  std::vector<std::string> fu;
  std::vector<std::size_t> origin;
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto f = fold(u[i]);
    if (f.empty()) continue;
    fu.push_back(std::move(f));
    origin.push_back(i);
  }
  std::vector<std::string> fv;
  for (const auto& t : v) {
    auto f = fold(t);
    if (!f.empty()) fv.push_back(std::move(f));
  }
  std::vector<TokenSpan> out;
  for (const auto& m : exact_matches(fu, fv)) out.push_back({origin[m.begin], origin[m.end - 1] + 1});
  return out;
}

std::size_t token_edit_distance(const std::vector<std::string>& a, std::size_t a0, std::size_t a1,
                                const std::vector<std::string>& b) {
  const std::size_t n = a1 - a0;
  const std::size_t m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[a0 + i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::vector<TokenSpan> fuzzy_matches(const std::vector<std::string>& u, const std::vector<std::string>& v) {
  std::vector<TokenSpan> out;
  if (v.size() < 3) return out;
  std::vector<std::string> fu, fv;
  for (const auto& t : u) fu.push_back(fold(t));
  for (const auto& t : v) fv.push_back(fold(t));
  for (std::size_t b = 0; b < fu.size(); ++b) {
    // Longest first so that the leftmost-then-longest order falls out of the loop.
    for (std::size_t len = v.size() + 1; len + 1 >= v.size() && len >= 1; --len) {
      if (b + len > fu.size()) continue;
      if (fu[b].empty() || fu[b + len - 1].empty()) continue;
      if (token_edit_distance(fu, b, b + len, fv) <= 1) out.push_back({b, b + len});
    }
  }
  return out;
}

}  // namespace

std::vector<TokenSpan> locate_value(const std::vector<std::string>& u, const std::vector<std::string>& v) {
  auto spans = exact_matches(u, v);
  if (!spans.empty()) return spans;
  spans = folded_matches(u, v);
  if (!spans.empty()) return spans;
  return fuzzy_matches(u, v);
}

AlignmentResult align_iob(std::string_view label, std::string_view utterance, const std::set<std::string>& known) {
  const auto utokens = tokenize(utterance);
  auto parsed = parse_slot_label(label, known);
  if (auto* err = std::get_if<SlotLabelError>(&parsed)) return AlignmentFailure{err->value, "bad_label"};
  const auto& pairs = std::get<std::vector<std::pair<std::string, std::string>>>(parsed);

  std::vector<std::vector<TokenSpan>> candidates;
  for (const auto& [name, value] : pairs) {
    auto spans = locate_value(utokens, tokenize(value));
    if (spans.empty()) return AlignmentFailure{value, "not_found"};
    candidates.push_back(std::move(spans));
  }

  std::vector<TokenSpan> chosen(pairs.size());
  std::vector<bool> used(utokens.size(), false);
  std::function<bool(std::size_t)> place = [&](std::size_t k) -> bool {
    if (k == pairs.size()) return true;
    for (const auto& span : candidates[k]) {
      bool free = true;
      for (std::size_t i = span.begin; i < span.end; ++i) free = free && !used[i];
      if (!free) continue;
      for (std::size_t i = span.begin; i < span.end; ++i) used[i] = true;
      chosen[k] = span;
      if (place(k + 1)) return true;
      for (std::size_t i = span.begin; i < span.end; ++i) used[i] = false;
    }
    return false;
  };
  if (!place(0)) {
    // Report the first value whose candidates all collide with earlier choices.
    return AlignmentFailure{pairs.empty() ? std::string() : pairs.back().second, "overlap"};
  }

  std::vector<std::string> tags(utokens.size(), "O");
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::string type = phrase_to_tag_type(pairs[k].first);
    for (std::size_t i = chosen[k].begin; i < chosen[k].end; ++i) tags[i] = (i == chosen[k].begin ? "B-" : "I-") + type;
  }
  return tags;
}

}  // namespace gcn
