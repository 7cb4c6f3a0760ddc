#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace gcn {

// NFC normalization, lowercasing, whitespace collapsed to single spaces and trimmed.
std::string normalize_text(std::string_view text);

// A token with byte offsets into the text it was cut from.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Whitespace split after punctuation detachment. A punctuation mark becomes its own
// token unless it is one of ' - . , sitting between two alphanumerics ("i'm", "i-town",
// "3.5"). Works on UTF-8; non-ASCII letters and '_' are word characters.
std::vector<Token> tokenize_with_offsets(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep = " ");
std::vector<std::string> split_whitespace(std::string_view text);
std::string_view trim(std::string_view text);

// True when every code point in the token is punctuation.
bool is_punctuation_token(std::string_view token);

// Conversions between code point offsets (used in dataset files) and byte offsets.
// Throw std::out_of_range when the offset lies beyond the text.
std::size_t codepoint_to_byte_offset(std::string_view text, std::size_t codepoints);
std::size_t byte_to_codepoint_offset(std::string_view text, std::size_t bytes);
std::size_t codepoint_length(std::string_view text);

}  // namespace gcn
