#include <doctest.h>

#include <fstream>

#include "tracer/judge.hpp"
#include "tracer/model.hpp"

using namespace tracer;

namespace {

Record golden() {
  std::ifstream in("data/golden_record.jsonl");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  return parse_record(line);
}

}  // namespace

TEST_CASE("rule judge matches the hand-labeled triple set") {
  RuleJudge judge;
  std::ifstream in("data/relation_triples.jsonl");
  REQUIRE(in.good());
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    auto relation = parse_relation(j.at("relation").get<std::string>());
    REQUIRE(relation.has_value());
    int got = judge.judge_relation(j.at("source").get<std::string>(),
                                   j.at("claim").get<std::string>(), *relation);
    CAPTURE(j.at("claim").get<std::string>());
    CHECK(got == j.at("label").get<int>());
    ++count;
  }
  CHECK(count == 20);
}

TEST_CASE("rule judge spot checks") {
  RuleJudge judge;
  // Case-insensitive verbatim quotation.
  CHECK(judge.judge_relation("Yamaha YZF-R1", "yamaha yzf-r1", Relation::Quotation) == 1);
  // No shared content: neither quotation nor inference.
  CHECK(judge.judge_relation("crimson amber violet", "sailboats raced",
                             Relation::Quotation) == 0);
  CHECK(judge.judge_relation("crimson amber violet", "sailboats raced",
                             Relation::Inference) == 0);
  // Compression rejects a claim longer than its source.
  CHECK(judge.judge_relation("crimson amber", "the crimson amber violet stones glowed",
                             Relation::Compression) == 0);
  // Low recall fails inference (spec'd lifespan arithmetic case).
  CHECK(judge.judge_relation("born 1834, died 1889", "he lived 55 years",
                             Relation::Inference) == 0);
}

TEST_CASE("rule judge determinism") {
  RuleJudge judge;
  for (int i = 0; i < 3; ++i) {
    CHECK(judge.judge_relation("the harvest festival runs each summer",
                               "harvest festival", Relation::Quotation) == 1);
  }
}

TEST_CASE("rule judge thresholds are configurable") {
  RuleJudgeThresholds strict;
  strict.inference_recall = 0.9;
  RuleJudge judge(strict);
  // 2/6 content recall passes the default 0.30 but not 0.90.
  CHECK(judge.judge_relation("the museum opened in 1902 near the harbor",
                             "the museum is probably older than the harbor ferry",
                             Relation::Inference) == 0);
}

TEST_CASE("rule judge record-level verdict") {
  RuleJudge judge;
  JudgeVerdict v = judge.judge_record(golden());
  CHECK(v.overall_correct);
  REQUIRE(v.sentence_check.size() == 3);
  for (const auto& c : v.sentence_check) CHECK(c.sentence_correct);

  Record bad = golden();
  bad.solution.sentences[1].provenance[0].source_text = "not in any observation";
  JudgeVerdict v2 = judge.judge_record(bad);
  CHECK_FALSE(v2.overall_correct);
  CHECK_FALSE(v2.sentence_check[1].source_text_correct);
  CHECK_FALSE(v2.error_details.empty());
}

TEST_CASE("verdict internal consistency") {
  RuleJudge judge;
  Record bad = golden();
  bad.solution.sentences[0].provenance[0].tool_id = "OCR_7";
  JudgeVerdict v = judge.judge_record(bad);
  CHECK_FALSE(v.overall_correct);
  // overall_correct false implies at least one failed sentence bit.
  bool any_failed = false;
  for (const auto& c : v.sentence_check) {
    if (!c.sentence_correct) any_failed = true;
    CHECK(c.sentence_correct ==
          (c.tool_id_correct && c.source_text_correct && c.relation_correct));
  }
  CHECK(any_failed);
}

TEST_CASE("scripted judge approves and rejects on cue") {
  ScriptedJudge judge;
  Record r = golden();
  CHECK(judge.judge_record(r).overall_correct);

  judge.reject_sentence(r.instance.id, 2, "source_text", "source not found in turn");
  JudgeVerdict v = judge.judge_record(r);
  CHECK_FALSE(v.overall_correct);
  REQUIRE(v.sentence_check.size() == 1);
  CHECK(v.sentence_check[0].sentence_id == 2);
  CHECK_FALSE(v.sentence_check[0].source_text_correct);
  CHECK(v.sentence_check[0].tool_id_correct);
  REQUIRE(v.error_details.size() == 1);
  CHECK(v.error_details[0] == "source not found in turn");
}

TEST_CASE("scripted judge simulates outages") {
  ScriptedJudge judge;
  Record r = golden();
  judge.set_unavailable(r.instance.id);
  CHECK_THROWS_AS(judge.judge_record(r), JudgeError);
}

TEST_CASE("scripted relation verdicts override the default") {
  ScriptedJudge judge;
  judge.set_default_relation_verdict(1);
  CHECK(judge.judge_relation("s", "c", Relation::Inference) == 1);
  judge.set_relation_verdict("s", "c", Relation::Inference, 0);
  CHECK(judge.judge_relation("s", "c", Relation::Inference) == 0);
  CHECK(judge.judge_relation("s", "c", Relation::Quotation) == 1);
}

TEST_CASE("json extraction from noisy judge replies") {
  // Ten noisy shapes a chatty judge might produce.
  const char* noisy[] = {
      R"(Sure! Here is the result: {"overall_correct": true, "error_details": [], "sentence_check": []})",
      R"({"overall_correct": false, "error_details": ["sentence 1: wrong tool"], "sentence_check": []} Hope that helps.)",
      "```json\n{\"overall_correct\": true, \"error_details\": [], \"sentence_check\": []}\n```",
      R"(The verdict {"overall_correct": true, "error_details": [], "sentence_check": [{"sentence_id": 1, "tool_id_correct": true, "source_text_correct": true, "relation_correct": true, "sentence_correct": true}]} is final.)",
      R"(note the brace } appears early {"overall_correct": true, "error_details": [], "sentence_check": []})",
      R"({"overall_correct": true, "error_details": ["contains \"quoted\" text and a { brace"], "sentence_check": []})",
      "Line one\nLine two\n{\"overall_correct\": false, \"error_details\": [], \"sentence_check\": []}\n",
      R"(prefix {"nested": {"overall_correct": true}, "overall_correct": true, "error_details": [], "sentence_check": []})",
      R"({ "overall_correct" : true , "error_details" : [ ] , "sentence_check" : [ ] })",
      R"(verdict below
{"overall_correct": true,
 "error_details": [],
 "sentence_check": []})",
  };
  for (const char* reply : noisy) {
    json j = extract_json_object(reply);
    JudgeVerdict v = JudgeVerdict::from_json(j);
    CHECK(v.sentence_check.size() <= 1);
  }
  CHECK_THROWS_AS(extract_json_object("no json here at all"), JudgeError);
  CHECK_THROWS_AS(extract_json_object("{truncated: "), JudgeError);
  try {
    extract_json_object("plain prose");
  } catch (const JudgeError& e) {
    CHECK(e.kind() == JudgeError::Kind::SchemaInvalid);
    CHECK(e.raw_reply() == "plain prose");
  }
}

TEST_CASE("verdict json round trip") {
  JudgeVerdict v;
  v.overall_correct = false;
  v.error_details = {"sentence 2: relation not supported"};
  v.sentence_check.push_back({2, true, true, false, false});
  JudgeVerdict back = JudgeVerdict::from_json(v.to_json());
  CHECK(back.overall_correct == v.overall_correct);
  CHECK(back.error_details == v.error_details);
  REQUIRE(back.sentence_check.size() == 1);
  CHECK(back.sentence_check[0].relation_correct == false);
}

TEST_CASE("schema-invalid judge replies are surfaced, never coerced") {
  json missing = json::parse(R"({"verdict": "yes"})");
  CHECK_THROWS_AS(JudgeVerdict::from_json(missing), JudgeError);
  json wrong_type = json::parse(R"({"overall_correct": "yes"})");
  CHECK_THROWS_AS(JudgeVerdict::from_json(wrong_type), JudgeError);
}

TEST_CASE("content hash is stable and collision-averse on fixtures") {
  std::string a = content_hash("payload-a");
  CHECK(a == content_hash("payload-a"));
  CHECK(a != content_hash("payload-b"));
  CHECK_FALSE(a.empty());
}

TEST_CASE("judge system prompt states the three rules") {
  const std::string& p = judge_system_prompt();
  CHECK(p.find("source_text") != std::string::npos);
  CHECK(p.find("verbatim") != std::string::npos);
}

#include <atomic>
#include <filesystem>
#include <thread>

#include <httplib.h>

TEST_CASE("remote judge speaks chat completions, retries, and caches") {
  std::atomic<int> hits{0};
  httplib::Server server;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    int n = ++hits;
    json body = json::parse(req.body);
    CHECK(body.at("model") == "test-judge");
    CHECK(body.at("temperature") == 0.0);
    CHECK(body.at("messages")[0].at("role") == "system");
    CHECK(req.get_header_value("Authorization") == "Bearer sekrit");
    if (n == 1) {
      // First attempt fails transiently; the client must retry.
      res.status = 503;
      return;
    }
    json reply = {{"choices",
                   json::array({{{"message",
                                  {{"role", "assistant"},
                                   {"content",
                                    "Verdict: {\"overall_correct\": true, \"error_details\": [], "
                                    "\"sentence_check\": [{\"sentence_id\": 1, \"tool_id_correct\": true, "
                                    "\"source_text_correct\": true, \"relation_correct\": true, "
                                    "\"sentence_correct\": true}, {\"sentence_id\": 2, \"tool_id_correct\": true, "
                                    "\"source_text_correct\": true, \"relation_correct\": true, "
                                    "\"sentence_correct\": true}, {\"sentence_id\": 3, \"tool_id_correct\": true, "
                                    "\"source_text_correct\": true, \"relation_correct\": true, "
                                    "\"sentence_correct\": true}]}"}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto cache_dir = std::filesystem::temp_directory_path() / "tracer-judge-cache-test";
  std::filesystem::remove_all(cache_dir);

  RemoteJudgeConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.model = "test-judge";
  cfg.api_key = "sekrit";
  cfg.cache_dir = cache_dir.string();
  cfg.retry_backoff_ms = 10;
  RemoteJudge judge(cfg);

  Record r = golden();
  JudgeVerdict v = judge.judge_record(r);
  CHECK(v.overall_correct);
  CHECK(v.sentence_check.size() == 3);
  CHECK(hits.load() == 2);  // one failure plus one success

  // Second call is served from the cache; the server sees no new request.
  JudgeVerdict v2 = judge.judge_record(r);
  CHECK(v2.overall_correct);
  CHECK(hits.load() == 2);

  server.stop();
  server_thread.join();
  std::filesystem::remove_all(cache_dir);
}
