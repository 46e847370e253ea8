#include <doctest.h>

#include <string>
#include <vector>

#include "multiref/errors.hpp"
#include "multiref/text.hpp"

using namespace multiref;

TEST_CASE("word_count counts maximal non-whitespace runs") {
  CHECK(text::word_count("") == 0);
  CHECK(text::word_count("   ") == 0);
  CHECK(text::word_count("hello") == 1);
  CHECK(text::word_count("hello world") == 2);
  CHECK(text::word_count("  hello   world  ") == 2);
  CHECK(text::word_count("a\tb\nc") == 3);
  CHECK(text::word_count("don't stop") == 2);
}

TEST_CASE("word_count treats unicode whitespace as separators") {
  CHECK(text::word_count("a\xc2\xa0ryman") == 2);          // no-break space
  CHECK(text::word_count("a\xe2\x80\x89ryman") == 2);      // thin space
  CHECK(text::word_count("\xe3\x80\x80ideographic") == 1); // leading CJK space
}

TEST_CASE("whitespace_tokens returns the runs themselves") {
  auto tokens = text::whitespace_tokens("  one  two three ");
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[0] == "one");
  CHECK(tokens[1] == "two");
  CHECK(tokens[2] == "three");
}

TEST_CASE("decode_codepoint is permissive") {
  std::size_t pos = 0;
  CHECK(text::decode_codepoint("a", pos) == U'a');
  CHECK(pos == 1);

  pos = 0;
  std::string two_byte = "\xc3\xa9";  // e with acute
  CHECK(text::decode_codepoint(two_byte, pos) == 0xE9);
  CHECK(pos == 2);

  pos = 0;
  std::string stray = "\xff";
  CHECK(text::decode_codepoint(stray, pos) == 0xFFFD);
  CHECK(pos == 1);

  pos = 0;
  std::string truncated = "\xe2\x80";
  CHECK(text::decode_codepoint(truncated, pos) == 0xFFFD);
  CHECK(pos == 1);

  pos = 0;
  std::string overlong = "\xc0\x80";  // overlong NUL
  CHECK(text::decode_codepoint(overlong, pos) == 0xFFFD);
}

TEST_CASE("lowercase folds ASCII and common accented capitals") {
  CHECK(text::lowercase("HeLLo") == "hello");
  CHECK(text::lowercase("MiXeD 42!") == "mixed 42!");
  CHECK(text::lowercase("\xc3\x89تت") == "\xc3\xa9تت");  // E-acute folds, Arabic passes
  CHECK(text::lowercase("ЖУК") == "жук");
}

TEST_CASE("scorer_tokens lowercases and peels edge punctuation") {
  auto tokens = text::scorer_tokens("Hello, world!");
  REQUIRE(tokens.size() == 4);
  CHECK(tokens[0] == "hello");
  CHECK(tokens[1] == ",");
  CHECK(tokens[2] == "world");
  CHECK(tokens[3] == "!");
}

TEST_CASE("scorer_tokens keeps interior punctuation attached") {
  auto tokens = text::scorer_tokens("don't mother-in-law");
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0] == "don't");
  CHECK(tokens[1] == "mother-in-law");
}

TEST_CASE("scorer_tokens handles all-punctuation and quoted tokens") {
  auto tokens = text::scorer_tokens("\"quoted\" ...");
  REQUIRE(tokens.size() == 6);
  CHECK(tokens[0] == "\"");
  CHECK(tokens[1] == "quoted");
  CHECK(tokens[2] == "\"");
  CHECK(tokens[3] == ".");
  CHECK(tokens[4] == ".");
  CHECK(tokens[5] == ".");
}

TEST_CASE("word_tokens punct rule isolates every punctuation code point") {
  auto tokens =
      text::word_tokens("don't go.", text::WordTokenizerRule::kPunct);
  REQUIRE(tokens.size() == 5);
  CHECK(tokens[0] == "don");
  CHECK(tokens[1] == "'");
  CHECK(tokens[2] == "t");
  CHECK(tokens[3] == "go");
  CHECK(tokens[4] == ".");
}

TEST_CASE("word_tokens whitespace rule splits on whitespace only") {
  auto tokens =
      text::word_tokens("don't go.", text::WordTokenizerRule::kWhitespace);
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0] == "don't");
  CHECK(tokens[1] == "go.");
}

TEST_CASE("word_tokens can lowercase first") {
  auto tokens =
      text::word_tokens("Go HOME", text::WordTokenizerRule::kPunct, true);
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0] == "go");
  CHECK(tokens[1] == "home");
}

TEST_CASE("tokenizer rule names round trip") {
  CHECK(text::parse_tokenizer_rule("punct") ==
        text::WordTokenizerRule::kPunct);
  CHECK(text::parse_tokenizer_rule("whitespace") ==
        text::WordTokenizerRule::kWhitespace);
  CHECK(text::tokenizer_rule_name(text::WordTokenizerRule::kPunct) == "punct");
  CHECK_THROWS_AS(text::parse_tokenizer_rule("bogus"), UsageError);
}

TEST_CASE("codepoints_no_space strips whitespace everywhere") {
  CHECK(text::codepoints_no_space("a b") == U"ab");
  CHECK(text::codepoints_no_space(" a\tb\nc ") == U"abc");
  CHECK(text::codepoints_no_space("caf\xc3\xa9 au lait") == U"caféaulait");
  CHECK(text::codepoints_no_space("") == U"");
}
