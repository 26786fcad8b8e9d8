#include <doctest.h>

#include "tracer/text.hpp"

using namespace tracer::text;

TEST_CASE("whitespace normalization collapses and trims") {
  CHECK(normalize_ws("  a\t b\n\nc  ") == "a b c");
  CHECK(normalize_ws("plain") == "plain");
  CHECK(normalize_ws("") == "");
  CHECK(normalize_ws(" \n\t ") == "");
}

TEST_CASE("loose normalization") {
  CHECK(normalize_loose("Yamaha YZF-R1") == "yamaha yzf r1");
  CHECK(normalize_loose("Engine displacement: 998 cc") == "engine displacement 998 cc");
  // Separators survive only between digits.
  CHECK(normalize_loose("born 1834, died 1889") == "born 1834 died 1889");
  CHECK(normalize_loose("Population: 12,500 people.") == "population 12,500 people");
  CHECK(normalize_loose("a.b") == "a b");
  CHECK(normalize_loose("3.14 approx") == "3.14 approx");
}

TEST_CASE("answer normalization canonicalizes numerals") {
  CHECK(normalize_answer("1,955") == "1955");
  CHECK(normalize_answer("12.0") == "12");
  CHECK(normalize_answer("12.05") == "12.05");
  CHECK(normalize_answer("1,234,567") == "1234567");
  // Not purely numeric after separator removal: left alone.
  CHECK(normalize_answer("a,b") == "a b");
  CHECK(normalize_answer("55 Years") == "55 years");
}

TEST_CASE("tokenize and stop list") {
  auto toks = tokenize("a b  c");
  REQUIRE(toks.size() == 3);
  CHECK(toks[2] == "c");
  CHECK(is_stopword("the"));
  CHECK(is_stopword("which"));
  CHECK_FALSE(is_stopword("harbor"));
  auto content = content_tokens("the museum is near the harbor");
  REQUIRE(content.size() == 3);
  CHECK(content[0] == "museum");
  CHECK(content[1] == "near");
  CHECK(content[2] == "harbor");
}

TEST_CASE("substring helpers") {
  CHECK(contains("born 1834, died 1889", "1834"));
  CHECK_FALSE(contains("born 1834", "1835"));
  CHECK_FALSE(contains("anything", ""));
  CHECK(contains_ws_tolerant("a   b\tc", "a b"));
  CHECK_FALSE(contains_ws_tolerant("a   b", "ab"));
}

TEST_CASE("token containment and recall") {
  std::vector<std::string> claim = {"x", "y"};
  std::vector<std::string> source = {"x", "z", "w"};
  CHECK(token_containment(claim, source) == doctest::Approx(0.5));
  CHECK(token_recall(claim, source) == doctest::Approx(0.5));
  CHECK(token_containment({}, source) == 0.0);
}

TEST_CASE("contiguous token subsequence") {
  std::vector<std::string> outer = {"the", "answer", "is", "55", "years"};
  CHECK(token_subsequence({"55", "years"}, outer));
  CHECK_FALSE(token_subsequence({"answer", "55"}, outer));
  CHECK_FALSE(token_subsequence({}, outer));
  CHECK_FALSE(token_subsequence({"years", "extra"}, outer));
}
