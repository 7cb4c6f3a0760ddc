#include <gtest/gtest.h>

#include "gcn/text.hpp"

using namespace gcn;

TEST(Normalize, LowercasesAndCollapsesWhitespace) {
  EXPECT_EQ(normalize_text("  What   Flights\tLeave\nPHOENIX "), "what flights leave phoenix");
  EXPECT_EQ(normalize_text(""), "");
}

TEST(Normalize, ComposesToNfc) {
  // "e" + combining acute -> U+00E9
  EXPECT_EQ(normalize_text("Cafe\xCC\x81"), "caf\xC3\xA9");
  EXPECT_EQ(normalize_text("CAF\xC3\x89"), "caf\xC3\xA9");
}

TEST(Tokenize, DetachesPunctuation) {
  EXPECT_EQ(tokenize("do i need a light jacket today?"),
            (std::vector<std::string>{"do", "i", "need", "a", "light", "jacket", "today", "?"}));
  EXPECT_EQ(tokenize("hi, there!"), (std::vector<std::string>{"hi", ",", "there", "!"}));
}

TEST(Tokenize, KeepsInnerJoiners) {
  EXPECT_EQ(tokenize("i'm on i-95 at 3.5 miles"),
            (std::vector<std::string>{"i'm", "on", "i-95", "at", "3.5", "miles"}));
  EXPECT_EQ(tokenize("'quoted'"), (std::vector<std::string>{"'", "quoted", "'"}));
}

TEST(Tokenize, UnderscoreIsAWordCharacter) {
  EXPECT_EQ(tokenize("play_music now"), (std::vector<std::string>{"play_music", "now"}));
}

TEST(Tokenize, OffsetsPointIntoSource) {
  const std::string s = "na\xC3\xAFve  caf\xC3\xA9!";
  for (const auto& t : tokenize_with_offsets(s)) EXPECT_EQ(s.substr(t.begin, t.end - t.begin), t.text);
}

TEST(Offsets, CodepointByteRoundTrip) {
  const std::string s = "a\xC3\xA9z";  // a é z
  EXPECT_EQ(codepoint_length(s), 3u);
  EXPECT_EQ(codepoint_to_byte_offset(s, 2), 3u);
  EXPECT_EQ(byte_to_codepoint_offset(s, 3), 2u);
  EXPECT_THROW(codepoint_to_byte_offset(s, 4), std::out_of_range);
}

TEST(Punctuation, Classification) {
  EXPECT_TRUE(is_punctuation_token("?"));
  EXPECT_TRUE(is_punctuation_token("..."));
  EXPECT_FALSE(is_punctuation_token("a."));
}

TEST(Helpers, JoinSplitTrim) {
  EXPECT_EQ(join({"a", "b", "c"}, "-"), "a-b-c");
  EXPECT_EQ(split_whitespace("  a \t b  "), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(trim("  x y "), "x y");
}
