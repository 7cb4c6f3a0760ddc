#include "gcn/text.hpp"

#include <cctype>
#include <stdexcept>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace gcn {
namespace {

struct CodePoint {
  UChar32 value;
  std::size_t begin;
  std::size_t end;
};

std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) c = 0xFFFD;
    out.push_back({c, static_cast<std::size_t>(start), static_cast<std::size_t>(i)});
  }
  return out;
}

// Connector punctuation ("_") counts as a word character, as in regex \w, so snake_case labels stay one token.
bool is_word_char(UChar32 c) {
  return u_isalnum(c) != 0 || u_charType(c) == U_NON_SPACING_MARK || u_charType(c) == U_CONNECTOR_PUNCTUATION;
}

bool is_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

bool is_punct(UChar32 c) {
  if (is_space(c) || is_word_char(c)) return false;
  return u_ispunct(c) != 0 || u_charType(c) == U_MATH_SYMBOL ||
         u_charType(c) == U_CURRENCY_SYMBOL || u_charType(c) == U_MODIFIER_SYMBOL ||
         u_charType(c) == U_OTHER_SYMBOL;
}

bool is_joiner(UChar32 c) { return c == '\'' || c == '-' || c == '.' || c == ','; }

}  // namespace

std::string normalize_text(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");

  icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  source.toLower(icu::Locale::getRoot());
  icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");

  std::string utf8;
  normalized.toUTF8String(utf8);

  std::string out;
  out.reserve(utf8.size());
  bool pending_space = false;
  for (const auto& cp : decode(utf8)) {
    if (is_space(cp.value)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(utf8, cp.begin, cp.end - cp.begin);
  }
  return out;
}

std::vector<Token> tokenize_with_offsets(std::string_view text) {
  const auto cps = decode(text);
  std::vector<Token> tokens;
  std::size_t i = 0;
  auto emit = [&](std::size_t first, std::size_t last) {
    const std::size_t b = cps[first].begin;
    const std::size_t e = cps[last - 1].end;
    tokens.push_back({std::string(text.substr(b, e - b)), b, e});
  };
  while (i < cps.size()) {
    if (is_space(cps[i].value)) {
      ++i;
      continue;
    }
    if (is_punct(cps[i].value)) {
      emit(i, i + 1);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && !is_space(cps[j].value)) {
      if (is_word_char(cps[j].value)) {
        ++j;
        continue;
      }
      const bool joins = is_joiner(cps[j].value) && j > i && j + 1 < cps.size() &&
                         is_word_char(cps[j - 1].value) && is_word_char(cps[j + 1].value);
      if (!joins) break;
      ++j;
    }
    emit(i, j);
    i = j;
  }
  return tokens;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_with_offsets(text)) out.push_back(std::move(t.text));
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return text.substr(b, e - b);
}

bool is_punctuation_token(std::string_view token) {
  if (token.empty()) return false;
  for (const auto& cp : decode(token)) {
    if (!is_punct(cp.value)) return false;
  }
  return true;
}

std::size_t codepoint_to_byte_offset(std::string_view text, std::size_t codepoints) {
  const auto cps = decode(text);
  if (codepoints > cps.size()) throw std::out_of_range("code point offset beyond text");
  return codepoints == cps.size() ? text.size() : cps[codepoints].begin;
}

std::size_t byte_to_codepoint_offset(std::string_view text, std::size_t bytes) {
  if (bytes > text.size()) throw std::out_of_range("byte offset beyond text");
  return decode(text.substr(0, bytes)).size();
}

std::size_t codepoint_length(std::string_view text) { return decode(text).size(); }

}  // namespace gcn
