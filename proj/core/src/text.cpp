#include "graphplay/text.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>

#include "graphplay/hash.hpp"

namespace graphplay {

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

namespace text {
namespace {

bool is_alpha(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_alnum(unsigned char c) { return is_alpha(c) || is_digit(c); }
bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}
char lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

constexpr std::array<std::string_view, 128> kStopwords = {
    "a",       "about",   "above",  "after",   "again",   "against", "all",
    "also",    "am",      "an",     "and",     "any",     "are",     "as",
    "at",      "be",      "been",   "before",  "being",   "below",   "between",
    "both",    "but",     "by",     "can",     "could",   "did",     "do",
    "does",    "doing",   "down",   "during",  "each",    "few",     "for",
    "from",    "further", "had",    "has",     "have",    "having",  "he",
    "her",     "here",    "hers",   "him",     "his",     "how",     "i",
    "if",      "in",      "into",   "is",      "it",      "its",     "itself",
    "just",    "may",     "me",     "might",   "more",    "most",    "must",
    "my",      "no",      "nor",    "not",     "now",     "of",      "off",
    "on",      "once",    "only",   "or",      "other",   "our",     "ours",
    "out",     "over",    "own",    "same",    "shall",   "she",     "should",
    "so",      "some",    "such",   "than",    "that",    "the",     "their",
    "theirs",  "them",    "then",   "there",   "these",   "they",    "this",
    "those",   "through", "to",     "too",     "under",   "until",   "up",
    "upon",    "us",      "very",   "via",     "was",     "we",      "were",
    "what",    "when",    "where",  "which",   "while",   "who",     "whom",
    "why",     "will",    "with",   "within",  "would",   "yet",     "you",
    "your",    "yours",
};

const std::set<std::string_view>& stopword_set() {
  static const std::set<std::string_view> set(kStopwords.begin(),
                                              kStopwords.end());
  return set;
}

bool all_digits(std::string_view s) {
  for (unsigned char c : s)
    if (!is_digit(c)) return false;
  return !s.empty();
}

// Abbreviations whose trailing period does not end a sentence.
bool ends_with_abbreviation(std::string_view before_period) {
  static constexpr std::array<std::string_view, 10> kAbbrev = {
      "fig", "figs", "eq", "eqs", "e.g", "i.e", "al", "vs", "cf", "sec"};
  std::size_t start = before_period.size();
  while (start > 0 && (is_alpha(before_period[start - 1]) ||
                       before_period[start - 1] == '.'))
    --start;
  std::string word = to_lower(before_period.substr(start));
  for (auto a : kAbbrev)
    if (word == a) return true;
  return false;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = lower(c);
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(lower(c));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_alnum(c)) {
      cur.push_back(lower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_stopword(std::string_view lowered_token) {
  return stopword_set().count(lowered_token) > 0;
}

std::set<std::string> keywords(std::string_view s) {
  std::set<std::string> out;
  for (auto& tok : tokenize(s)) {
    if (is_stopword(tok) || all_digits(tok)) continue;
    out.insert(std::move(tok));
  }
  return out;
}

std::vector<ExtractedNumber> extract_numbers(std::string_view s) {
  std::vector<ExtractedNumber> out;
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    if (!is_digit(s[i])) {
      ++i;
      continue;
    }
    // Digit run glued to a letter on the left is part of an identifier.
    if (i > 0 && is_alpha(s[i - 1])) {
      while (i < n && (is_digit(s[i]) || s[i] == '.')) ++i;
      continue;
    }
    std::size_t start = i;
    bool negative = false;
    if (i > 0 && (s[i - 1] == '-' || s[i - 1] == '+')) {
      bool glued = i > 1 && is_alnum(s[i - 1 - 1]);
      if (!glued) {
        start = i - 1;
        negative = s[i - 1] == '-';
      }
    }
    std::size_t j = i;
    while (j < n && is_digit(s[j])) ++j;
    if (j + 1 < n && s[j] == '.' && is_digit(s[j + 1])) {
      ++j;
      while (j < n && is_digit(s[j])) ++j;
    }
    double value = 0.0;
    std::from_chars(s.data() + i, s.data() + j, value);
    if (negative) value = -value;
    ExtractedNumber num;
    num.value = value;
    num.offset = start;
    if (j < n && s[j] == '%') {
      num.percent = true;
      ++j;
    }
    out.push_back(num);
    i = j;
  }
  return out;
}

std::vector<std::string> sentences(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    char c = s[i];
    if (c != '.' && c != '!' && c != '?') continue;
    bool boundary = (i + 1 == n) || is_space(s[i + 1]);
    if (!boundary) continue;
    if (c == '.' && ends_with_abbreviation(s.substr(start, i - start)))
      continue;
    std::string sent = trim(s.substr(start, i + 1 - start));
    if (!sent.empty()) out.push_back(std::move(sent));
    start = i + 1;
  }
  std::string tail = trim(s.substr(std::min(start, n)));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::string first_sentence(std::string_view s) {
  auto all = sentences(s);
  return all.empty() ? std::string() : all.front();
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::size_t find_word(std::string_view haystack, std::string_view needle,
                      std::size_t from) {
  if (needle.empty()) return std::string_view::npos;
  std::string hay = to_lower(haystack);
  std::string ndl = to_lower(needle);
  std::size_t pos = hay.find(ndl, from);
  while (pos != std::string::npos) {
    bool left_ok = pos == 0 || !is_alnum(hay[pos - 1]) ||
                   !is_alnum(ndl.front());
    std::size_t end = pos + ndl.size();
    bool right_ok = end >= hay.size() || !is_alnum(hay[end]) ||
                    !is_alnum(ndl.back());
    if (left_ok && right_ok) return pos;
    pos = hay.find(ndl, pos + 1);
  }
  return std::string_view::npos;
}

std::string slugify(std::string_view s) {
  std::string out;
  bool dash = false;
  for (char c : s) {
    if (is_alnum(c) && static_cast<unsigned char>(c) < 0x80) {
      if (dash && !out.empty()) out.push_back('-');
      dash = false;
      out.push_back(lower(c));
    } else {
      dash = true;
    }
  }
  return out;
}

}  // namespace text
}  // namespace graphplay
