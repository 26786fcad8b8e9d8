#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tracer::text {

// Collapse runs of whitespace to a single space and trim both ends.
std::string normalize_ws(std::string_view s);

// Lowercase (ASCII), replace punctuation with spaces, collapse whitespace.
std::string normalize_loose(std::string_view s);

// normalize_loose plus numeral canonicalization: thousands separators
// stripped from digit groups, trailing ".0" removed.
std::string normalize_answer(std::string_view s);

std::vector<std::string> tokenize(std::string_view s);

// Tokens of normalize_loose(s) minus the stop list.
std::vector<std::string> content_tokens(std::string_view s);

bool is_stopword(std::string_view token);

// Contiguous byte-exact substring test.
bool contains(std::string_view haystack, std::string_view needle);

// Substring test after normalize_ws on both sides.
bool contains_ws_tolerant(std::string_view haystack, std::string_view needle);

// Fraction of claim tokens present in the source token set; 0 when claim is empty.
double token_containment(const std::vector<std::string>& claim,
                         const std::vector<std::string>& source);

// Fraction of claim tokens recovered from source (same formula, named for its
// role in relation checks).
double token_recall(const std::vector<std::string>& claim,
                    const std::vector<std::string>& source);

// True when the tokens of `inner` appear as a contiguous run inside the
// tokens of `outer`.
bool token_subsequence(const std::vector<std::string>& inner,
                       const std::vector<std::string>& outer);

}  // namespace tracer::text
