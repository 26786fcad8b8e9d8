#include "tracer/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace tracer::text {

namespace {

// Fixed 50-word stop list used by content-token extraction.
constexpr std::array<std::string_view, 50> kStopwords = {
    "a",    "an",   "the",  "and",  "or",    "but",  "if",    "then",
    "is",   "are",  "was",  "were", "be",    "been", "being", "of",
    "to",   "in",   "on",   "at",   "by",    "for",  "with",  "from",
    "as",   "it",   "its",  "this", "that",  "these", "those", "he",
    "she",  "they", "we",   "you",  "i",     "his",  "her",   "their",
    "not",  "no",   "so",   "do",   "does",  "did",  "has",   "have",
    "had",  "which"};

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) {
           return std::isdigit(static_cast<unsigned char>(c)) != 0;
         });
}

// "1,955" -> "1955"; "12.0" -> "12". Leaves everything else alone.
std::string canonicalize_numeral(std::string token) {
  std::string digits;
  for (char c : token) {
    if (c == ',') continue;
    digits.push_back(c);
  }
  // Only strip separators when the remainder is purely numeric.
  std::string no_commas = (digits != token && all_digits(digits)) ? digits : token;
  auto dot = no_commas.find('.');
  if (dot != std::string::npos && dot > 0 && all_digits(no_commas.substr(0, dot))) {
    std::string frac = no_commas.substr(dot + 1);
    if (all_digits(frac) &&
        std::all_of(frac.begin(), frac.end(), [](char c) { return c == '0'; })) {
      return no_commas.substr(0, dot);
    }
  }
  return no_commas;
}

}  // namespace

std::string normalize_ws(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

std::string normalize_loose(std::string_view s) {
  std::string mapped;
  mapped.reserve(s.size());
  for (char c : s) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) || uc >= 0x80) {
      mapped.push_back(static_cast<char>(std::tolower(uc)));
    } else if (c == ',' || c == '.') {
      // Kept here so numeral canonicalization can see them; stripped later
      // when they are not inside a number.
      mapped.push_back(c);
    } else {
      mapped.push_back(' ');
    }
  }
  // Second pass: drop ',' and '.' unless flanked by digits.
  std::string out;
  out.reserve(mapped.size());
  for (size_t i = 0; i < mapped.size(); ++i) {
    char c = mapped[i];
    if (c == ',' || c == '.') {
      bool prev_digit = i > 0 && std::isdigit(static_cast<unsigned char>(mapped[i - 1]));
      bool next_digit =
          i + 1 < mapped.size() && std::isdigit(static_cast<unsigned char>(mapped[i + 1]));
      if (prev_digit && next_digit) {
        out.push_back(c);
      } else {
        out.push_back(' ');
      }
    } else {
      out.push_back(c);
    }
  }
  return normalize_ws(out);
}

std::string normalize_answer(std::string_view s) {
  auto tokens = tokenize(normalize_loose(s));
  std::string out;
  for (auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += canonicalize_numeral(std::move(t));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_space(c)) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_stopword(std::string_view token) {
  return std::find(kStopwords.begin(), kStopwords.end(), token) != kStopwords.end();
}

std::vector<std::string> content_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize(normalize_loose(s))) {
    if (!is_stopword(t)) out.push_back(std::move(t));
  }
  return out;
}

bool contains(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return false;
  return haystack.find(needle) != std::string_view::npos;
}

bool contains_ws_tolerant(std::string_view haystack, std::string_view needle) {
  return contains(normalize_ws(haystack), normalize_ws(needle));
}

double token_containment(const std::vector<std::string>& claim,
                         const std::vector<std::string>& source) {
  if (claim.empty()) return 0.0;
  size_t hit = 0;
  for (const auto& t : claim) {
    if (std::find(source.begin(), source.end(), t) != source.end()) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(claim.size());
}

double token_recall(const std::vector<std::string>& claim,
                    const std::vector<std::string>& source) {
  return token_containment(claim, source);
}

bool token_subsequence(const std::vector<std::string>& inner,
                       const std::vector<std::string>& outer) {
  if (inner.empty()) return false;
  if (inner.size() > outer.size()) return false;
  for (size_t i = 0; i + inner.size() <= outer.size(); ++i) {
    if (std::equal(inner.begin(), inner.end(), outer.begin() + static_cast<long>(i))) {
      return true;
    }
  }
  return false;
}

}  // namespace tracer::text
