#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

// Lexical helpers shared by construction, rewards and evaluation. All of them
// treat input as ASCII-lowercasable bytes; non-ASCII bytes are kept inside
// tokens untouched.
namespace graphplay::text {

struct ExtractedNumber {
  double value = 0.0;
  bool percent = false;
  std::size_t offset = 0;  // byte offset of the first character
};

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
// Lowercase, trim, and collapse whitespace runs to one space.
std::string normalize(std::string_view s);

// Alphanumeric runs, lowercased.
std::vector<std::string> tokenize(std::string_view s);

bool is_stopword(std::string_view lowered_token);

// Content words: tokens minus stopwords minus purely numeric tokens.
std::set<std::string> keywords(std::string_view s);

// Signed decimals and percentages. A digit run glued to a preceding letter
// ("L2", "Qwen3") is not a number; a '-' counts as a sign only when it does
// not follow an alphanumeric character ("ResNet-50" yields 50).
std::vector<ExtractedNumber> extract_numbers(std::string_view s);

// Sentence split on . ! ? followed by whitespace, skipping common
// abbreviations (Fig., Eq., e.g., et al.) and decimal points.
std::vector<std::string> sentences(std::string_view s);
std::string first_sentence(std::string_view s);

// Shortest round-trip decimal form ("93", "0.85").
std::string format_number(double value);

// Case-insensitive search for `needle` in `haystack` where the match is not
// glued to alphanumerics on either side. Returns npos when absent.
std::size_t find_word(std::string_view haystack, std::string_view needle,
                      std::size_t from = 0);

// Lowercase slug made of [a-z0-9-] suitable for node ids.
std::string slugify(std::string_view s);

}  // namespace graphplay::text
