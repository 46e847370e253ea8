#ifndef MULTIREF_TEXT_HPP
#define MULTIREF_TEXT_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace multiref::text {

// UTF-8 decoding is permissive: an invalid byte decodes as U+FFFD and the
// cursor advances one byte, so every input has one fixed token stream.

// Decodes the code point starting at s[pos]; advances pos past it.
char32_t decode_codepoint(std::string_view s, std::size_t& pos);

bool is_space(char32_t c);   // Unicode whitespace (fixed list, see text.cpp)
bool is_punct(char32_t c);   // ASCII + common typographic punctuation
char32_t to_lower(char32_t c);

// Simple case folding over ASCII, Latin-1, Latin Extended-A and basic
// Cyrillic; other code points pass through unchanged.
std::string lowercase(std::string_view s);

// Maximal runs of non-whitespace code points.
std::vector<std::string_view> whitespace_tokens(std::string_view s);

// Number of maximal non-whitespace runs; the corpus word-limit rule.
std::size_t word_count(std::string_view s);

// Tokenizer for the embedding scorer: lowercase, split on whitespace, then
// peel leading/trailing punctuation off each token as standalone tokens.
// Interior punctuation (don't, mother-in-law) stays attached.
std::vector<std::string> scorer_tokens(std::string_view s);

// Tokenizer rule for the n-gram metrics.
enum class WordTokenizerRule {
  kPunct,       // every punctuation code point becomes its own token
  kWhitespace,  // plain whitespace split
};

WordTokenizerRule parse_tokenizer_rule(std::string_view name);
std::string_view tokenizer_rule_name(WordTokenizerRule rule);

std::vector<std::string> word_tokens(std::string_view s, WordTokenizerRule rule,
                                     bool lowercase_text = false);

// Code points of s with all whitespace removed; substrate for character
// n-grams.
std::u32string codepoints_no_space(std::string_view s);

}  // namespace multiref::text

#endif  // MULTIREF_TEXT_HPP
