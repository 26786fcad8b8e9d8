#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tracer/metrics.hpp"
#include "tracer/synth.hpp"

using namespace tracer;

namespace {

ProvLink link(const char* tool_id, Relation rel, const char* source) {
  ProvLink l;
  l.tool_id = tool_id;
  l.relation = rel;
  l.source_key = source;
  return l;
}

Record golden() {
  std::ifstream in("data/golden_record.jsonl");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  return parse_record(line);
}

}  // namespace

TEST_CASE("accuracy") {
  CHECK(accuracy({1, 1, 0, 1}) == doctest::Approx(75.0));
  CHECK(accuracy({1, 1, 1}) == doctest::Approx(100.0));
  CHECK_THROWS_AS(accuracy({}), MetricsError);
  // 1995 of 2550 rounds to 78.24 at the published scale.
  std::vector<int> evals(2550, 0);
  std::fill(evals.begin(), evals.begin() + 1995, 1);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", accuracy(evals));
  CHECK(std::string(buf) == "78.24");
}

TEST_CASE("f1 reproduces the published table values") {
  double f1_a = f1_from_pr(89.24, 91.85);
  CHECK(std::abs(f1_a - 90.52) <= 0.02);
  double f1_b = f1_from_pr(68.42, 73.15);
  CHECK(std::abs(f1_b - 70.70) <= 0.02);
  CHECK(f1_from_pr(0.0, 0.0) == 0.0);
  CHECK(f1_from_pr(50.0, 50.0) == doctest::Approx(50.0));
}

TEST_CASE("f1 bounded by max of precision and recall") {
  const double cases[][2] = {{10, 90}, {30, 40}, {99, 1}, {77, 77}};
  for (auto& c : cases) {
    double f1 = f1_from_pr(c[0], c[1]);
    CHECK(f1 <= std::max(c[0], c[1]) + 1e-12);
    if (c[0] == c[1]) CHECK(f1 == doctest::Approx(c[0]));
  }
}

TEST_CASE("traceability over verifier reports") {
  VerificationReport pass;
  pass.c_schema = 1;
  pass.r_trace = 1;
  VerificationReport fail;
  fail.c_schema = 1;
  fail.r_trace = 0;
  fail.verdicts.push_back({1, 0, 1, 0, 0, 0, {}});
  CHECK(traceability(std::vector<VerificationReport>{pass, pass, pass, fail}) ==
        doctest::Approx(75.0));
  CHECK_THROWS_AS(traceability(std::vector<VerificationReport>{}), MetricsError);
}

TEST_CASE("traceability over judge verdicts") {
  JudgeVerdict yes;
  yes.overall_correct = true;
  JudgeVerdict no;
  no.overall_correct = false;
  CHECK(traceability(std::vector<JudgeVerdict>{yes, no}) == doctest::Approx(50.0));
}

TEST_CASE("link extraction normalizes source keys") {
  Record r = golden();
  auto links = extract_links(r);
  REQUIRE(links.size() == 3);
  CHECK(links[0].tool_id == "OCR_1");
  CHECK(links[0].relation == Relation::Quotation);
  CHECK(links[0].source_key == "the museum opened in 1902 near the harbor");
  r.solution.sentences[0].provenance[0].source_text = "  The MUSEUM opened\tin 1902 near the harbor ";
  CHECK(extract_links(r)[0].source_key == links[0].source_key);
}

TEST_CASE("link matching modes") {
  ProvLink a = link("OCR_1", Relation::Quotation, "the museum opened in 1902");
  ProvLink b = link("OCR_1", Relation::Quotation, "museum opened in 1902");
  ProvLink c = link("OCR_1", Relation::Inference, "the museum opened in 1902");
  ProvLink d = link("OCR_2", Relation::Quotation, "the museum opened in 1902");
  CHECK(links_match(a, a, LinkMatchMode::Exact));
  CHECK_FALSE(links_match(a, b, LinkMatchMode::Exact));
  CHECK(links_match(a, b, LinkMatchMode::Containment));  // one contains the other
  CHECK(links_match(b, a, LinkMatchMode::Containment));
  CHECK_FALSE(links_match(a, c, LinkMatchMode::Containment));  // relation differs
  CHECK_FALSE(links_match(a, d, LinkMatchMode::Containment));  // tool differs
}

TEST_CASE("identical link sets give perfect scores") {
  std::vector<ProvLink> links = {link("OCR_1", Relation::Quotation, "alpha beta"),
                                 link("OCR_2", Relation::Inference, "gamma"),
                                 link("GoogleSearch_1", Relation::Compression, "delta")};
  PrfResult res = prov_prf({links}, {links});
  CHECK(res.precision_pct == doctest::Approx(100.0));
  CHECK(res.recall_pct == doctest::Approx(100.0));
  CHECK(res.f1_pct == doctest::Approx(100.0));
  CHECK(res.matched == 3);
}

TEST_CASE("greedy matching is one-to-one") {
  // Two identical pred links cannot both claim the single ref link.
  std::vector<ProvLink> pred = {link("OCR_1", Relation::Quotation, "x"),
                                link("OCR_1", Relation::Quotation, "x")};
  std::vector<ProvLink> ref = {link("OCR_1", Relation::Quotation, "x")};
  CHECK(greedy_match(pred, ref, LinkMatchMode::Exact) == 1);
  PrfResult res = prov_prf({pred}, {ref});
  CHECK(res.precision_pct == doctest::Approx(50.0));
  CHECK(res.recall_pct == doctest::Approx(100.0));
}

TEST_CASE("empty sides are flagged not thrown") {
  PrfResult res = prov_prf({{}}, {{link("OCR_1", Relation::Quotation, "x")}});
  CHECK(res.empty_side);
  CHECK(res.precision_pct == 0.0);
  CHECK(res.recall_pct == 0.0);
}

TEST_CASE("greedy equals the brute-force maximum on fixtures") {
  // Crafted so a careless greedy could in principle lose a match.
  std::vector<ProvLink> pred = {link("OCR_1", Relation::Quotation, "ab"),
                                link("OCR_1", Relation::Quotation, "b")};
  std::vector<ProvLink> ref = {link("OCR_1", Relation::Quotation, "b"),
                               link("OCR_1", Relation::Quotation, "abc")};
  size_t greedy = greedy_match(pred, ref, LinkMatchMode::Containment);
  size_t optimal = oracle::oracle_match(pred, ref, LinkMatchMode::Containment);
  CHECK(greedy == optimal);
  CHECK(optimal == 2);

  // Exhaustive-ish sweep over small synthetic instances.
  const char* tools[] = {"OCR_1", "OCR_2"};
  const char* sources[] = {"a", "ab", "c"};
  std::vector<ProvLink> pool;
  for (const char* t : tools) {
    for (const char* s : sources) pool.push_back(link(t, Relation::Quotation, s));
  }
  for (size_t mask_p = 0; mask_p < (1u << pool.size()); mask_p += 7) {
    for (size_t mask_r = 0; mask_r < (1u << pool.size()); mask_r += 5) {
      std::vector<ProvLink> p, q;
      for (size_t i = 0; i < pool.size(); ++i) {
        if (mask_p & (1u << i)) p.push_back(pool[i]);
        if (mask_r & (1u << i)) q.push_back(pool[i]);
      }
      CHECK(greedy_match(p, q, LinkMatchMode::Containment) ==
            oracle::oracle_match(p, q, LinkMatchMode::Containment));
    }
  }
}

TEST_CASE("micro and macro averaging differ as expected") {
  std::vector<ProvLink> big(9, link("OCR_1", Relation::Quotation, "x"));
  std::vector<ProvLink> big_ref = big;
  std::vector<ProvLink> small = {link("OCR_2", Relation::Quotation, "y")};
  std::vector<ProvLink> small_ref = {link("OCR_2", Relation::Quotation, "z")};
  MetricsOptions micro;
  MetricsOptions macro;
  macro.averaging = AveragingMode::Macro;
  PrfResult m1 = prov_prf({big, small}, {big_ref, small_ref}, micro);
  PrfResult m2 = prov_prf({big, small}, {big_ref, small_ref}, macro);
  CHECK(m1.precision_pct == doctest::Approx(90.0));
  CHECK(m2.precision_pct == doctest::Approx(50.0));
}

TEST_CASE("tool stats count flagged, unknown, and empty-observation turns") {
  ToolTurn ok;
  ok.name = "OCR";
  ok.tool = Tool::OCR;
  ok.observation = "text";
  ToolTurn flagged = ok;
  flagged.error_flag = true;
  ToolTurn unknown = ok;
  unknown.name = "WebSearch";
  unknown.tool = Tool::Unknown;
  ToolTurn empty = ok;
  empty.observation = "";
  ToolStats stats = tool_stats({{ok, flagged}, {unknown}, {}});
  CHECK(stats.total_calls == 3);
  CHECK(stats.total_errors == 2);
  CHECK(tool_stats({{empty}}).total_errors == 1);
}

TEST_CASE("full report on a small corpus") {
  auto corpus_data = synth::gen_corpus(50, 12, {});
  const auto& corpus = corpus_data.records;
  RuleJudge judge;
  std::vector<VerificationReport> reports;
  for (const auto& r : corpus) reports.push_back(verify(r, judge));
  MetricsReport report = full_report(corpus, corpus, reports);
  CHECK(report.accuracy_pct == doctest::Approx(100.0));
  CHECK(report.traceability_pct == doctest::Approx(100.0));
  CHECK(report.prov_f1_pct == doctest::Approx(100.0));
  CHECK_FALSE(report.has_summ);

  // Summarization judgments are a separate eval file.
  std::vector<std::pair<std::string, int>> summ;
  for (size_t i = 0; i < corpus.size(); ++i) {
    summ.push_back({corpus[i].instance.id, i % 2 == 0 ? 1 : 0});
  }
  MetricsReport with_summ = full_report(corpus, corpus, reports, summ);
  CHECK(with_summ.has_summ);
  CHECK(with_summ.summ_accuracy_pct == doctest::Approx(50.0));
}

TEST_CASE("full report rejects mismatched ids") {
  auto corpus_data = synth::gen_corpus(51, 4, {});
  auto pred = corpus_data.records;
  auto ref = corpus_data.records;
  pred[2].instance.id = "someone-else";
  RuleJudge judge;
  std::vector<VerificationReport> reports;
  for (const auto& r : pred) reports.push_back(verify(r, judge));
  try {
    full_report(pred, ref, reports);
    FAIL("expected id mismatch");
  } catch (const MetricsError& e) {
    CHECK(std::string(e.what()).find("someone-else") != std::string::npos);
  }
}

TEST_CASE("corpus order does not change metrics") {
  auto corpus_data = synth::gen_corpus(52, 10, {});
  auto corpus = corpus_data.records;
  RuleJudge judge;
  std::vector<VerificationReport> reports;
  for (const auto& r : corpus) reports.push_back(verify(r, judge));
  MetricsReport a = full_report(corpus, corpus, reports);
  std::reverse(corpus.begin(), corpus.end());
  std::reverse(reports.begin(), reports.end());
  MetricsReport b = full_report(corpus, corpus, reports);
  CHECK(a.accuracy_pct == b.accuracy_pct);
  CHECK(a.prov_f1_pct == b.prov_f1_pct);
  CHECK(a.traceability_pct == b.traceability_pct);
}
