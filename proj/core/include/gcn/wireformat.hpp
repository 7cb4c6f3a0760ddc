#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gcn/datamodel.hpp"

namespace gcn {

class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// <BOS> label <GO> utterance <EOS>. Slot-tagging examples with an empty label are written
// with the "generic" label. Throws FormatError when a field contains a separator.
std::string serialize(const LabeledExample& example, const SeparatorSet& separators = SeparatorSet{});

enum class MalformedReason { MissingBos, MissingGo, MissingEos, EmptyLabel, EmptyUtterance, OutOfOrder };

std::string_view to_string(MalformedReason reason);

struct Malformed {
  MalformedReason reason;
  bool operator==(const Malformed&) const = default;
};

using ParseResult = std::variant<LabeledExample, Malformed>;

// Never throws. The label is the text between the first BOS and the first GO after it,
// the utterance the text between that GO and the first EOS after it. An empty slot
// label parses to "generic".
ParseResult parse(std::string_view raw, const SeparatorSet& separators, TaskKind task);

// A slot mention inside an utterance. Offsets are code point offsets, end exclusive.
struct SlotSpan {
  std::string slot_name;  // phrase form, e.g. "arrival time"
  std::string value;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
};

// "arrival_time" -> "arrival time".
std::string slot_name_to_phrase(std::string_view slot_name);
// Tag entity type for a phrase: "arrival time" -> "arrival_time" (tags stay whitespace-free).
std::string phrase_to_tag_type(std::string_view phrase);

// "slot1 value1 slot2 value2 ..." in the given order; "generic" for no pairs.
std::string make_slot_label(const std::vector<std::pair<std::string, std::string>>& pairs);

struct SlotLabelError {
  std::string value;
  std::string reason;
};

// Greedy longest-prefix segmentation of a slot label against the known slot phrases.
std::variant<std::vector<std::pair<std::string, std::string>>, SlotLabelError> parse_slot_label(
    std::string_view label, const std::set<std::string>& known_slot_names);

struct AlignmentFailure {
  std::string value;   // the value that could not be placed (empty for label-level errors)
  std::string reason;  // "not_found", "overlap", "bad_label"
  bool operator==(const AlignmentFailure&) const = default;
};

using AlignmentResult = std::variant<std::vector<std::string>, AlignmentFailure>;

// Derives IOB tags by locating each generated value inside the utterance: exact token
// match first, then case/punctuation-insensitive match, then (values of >= 3 tokens) a
// window within one token edit. Candidates are ordered leftmost, then longest; a
// backtracking pass picks the first non-overlapping assignment in slot order.
AlignmentResult align_iob(std::string_view label, std::string_view utterance,
                          const std::set<std::string>& known_slot_names);

// Token span of each candidate occurrence, exposed for tests and diagnostics.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  bool operator==(const TokenSpan&) const = default;
};
std::vector<TokenSpan> locate_value(const std::vector<std::string>& utterance_tokens,
                                    const std::vector<std::string>& value_tokens);

}  // namespace gcn
