#include <doctest.h>

#include <fstream>

#include "tracer/model.hpp"

using namespace tracer;

namespace {

const char* kFlat = R"({"id":"r1","question":"what brand","images":["a.jpg"],"answer":"Yamaha","trajectory":[{"name":"OCR","thought":"read","input":"a.jpg","output":"Yamaha YZF-R1"},{"name":"GoogleSearch","input":"yamaha","output":"raced in 1955"}],"solution":{"response":"The brand is Yamaha. It first raced in 1955.","sentence":[{"sentence_id":1,"text":"The brand is Yamaha.","provenance":[{"tool_id":"OCR_1","source_text":"Yamaha YZF-R1","relation":"Inference"}]},{"sentence_id":2,"text":"It first raced in 1955.","provenance":[{"tool_id":"GoogleSearch_1","source_text":"raced in 1955","relation":"Quotation"}]}]}})";

}  // namespace

TEST_CASE("flat record parses field by field") {
  Record r = parse_record(kFlat);
  CHECK(r.instance.id == "r1");
  CHECK(r.instance.gold_answer == "Yamaha");
  REQUIRE(r.trajectory.size() == 2);
  CHECK(r.trajectory[0].tool == Tool::OCR);
  CHECK(r.trajectory[0].turn_id == "OCR_1");
  CHECK(r.trajectory[0].thought.has_value());
  CHECK_FALSE(r.trajectory[1].thought.has_value());
  REQUIRE(r.solution.sentences.size() == 2);
  CHECK(r.solution.sentences[1].provenance[0].relation == Relation::Quotation);
}

TEST_CASE("wrapped and flat forms serialize identically") {
  json flat = json::parse(kFlat);
  json wrapped = flat;
  wrapped["solution"] = json{{"role", "assistant"}, {"content", flat["solution"]}};
  Record a = parse_record(flat.dump());
  Record b = parse_record(wrapped.dump());
  CHECK(serialize_record(a) == serialize_record(b));
  CHECK(record_equal(a, b));
}

TEST_CASE("unknown relation fails strict parse naming the field") {
  json j = json::parse(kFlat);
  j["solution"]["sentence"][0]["provenance"][0]["relation"] = "Paraphrase";
  try {
    parse_record(j.dump());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::WrongType);
    CHECK(e.path().find("relation") != std::string::npos);
    CHECK(e.record_id() == "r1");
  }
  // Lenient mode keeps the raw label for the verifier to fault.
  ParseOptions lenient;
  lenient.strict_relations = false;
  Record r = parse_record(j.dump(), lenient);
  CHECK_FALSE(r.solution.sentences[0].provenance[0].relation.has_value());
  CHECK(r.solution.sentences[0].provenance[0].relation_raw == "Paraphrase");
}

TEST_CASE("malformed and incomplete lines") {
  CHECK_THROWS_AS(parse_record("{not json"), ParseError);
  json j = json::parse(kFlat);
  j.erase("question");
  try {
    parse_record(j.dump());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::MissingField);
    CHECK(e.path().find("question") != std::string::npos);
  }
}

TEST_CASE("turn id assignment in both modes") {
  auto make = [](std::vector<std::string> names) {
    std::vector<ToolTurn> turns;
    int pos = 1;
    for (auto& n : names) {
      ToolTurn t;
      t.position = pos++;
      t.name = n;
      t.tool = parse_tool(n);
      turns.push_back(t);
    }
    return turns;
  };
  auto per_tool = assign_turn_ids(make({"OCR", "GoogleSearch", "OCR"}), TurnIdMode::PerTool);
  REQUIRE(per_tool.size() == 3);
  CHECK(per_tool[0].turn_id == "OCR_1");
  CHECK(per_tool[1].turn_id == "GoogleSearch_1");
  CHECK(per_tool[2].turn_id == "OCR_2");

  auto global =
      assign_turn_ids(make({"ImageDescription", "OCR", "GoogleSearch"}), TurnIdMode::Global);
  CHECK(global[0].turn_id == "ImageDescription_1");
  CHECK(global[1].turn_id == "OCR_2");
  CHECK(global[2].turn_id == "GoogleSearch_3");

  CHECK(assign_turn_ids({}, TurnIdMode::PerTool).empty());

  auto unknown = assign_turn_ids(make({"WebSearch", "WebSearch"}), TurnIdMode::PerTool);
  CHECK(unknown[0].tool == Tool::Unknown);
  CHECK(unknown[0].turn_id == "WebSearch_1");
  CHECK(unknown[1].turn_id == "WebSearch_2");
}

TEST_CASE("turn ids are unique within a trajectory") {
  Record r = parse_record(kFlat);
  for (size_t i = 0; i < r.trajectory.size(); ++i) {
    for (size_t j = i + 1; j < r.trajectory.size(); ++j) {
      CHECK(r.trajectory[i].turn_id != r.trajectory[j].turn_id);
    }
  }
}

TEST_CASE("response reconstruction") {
  SentenceRecord s1;
  s1.sentence_id = 1;
  s1.text = "The brand is Yamaha.";
  SentenceRecord s2;
  s2.sentence_id = 2;
  s2.text = "It first raced in 1955.";
  CHECK(reconstruct_response({s1, s2}) == "The brand is Yamaha. It first raced in 1955.");
  CHECK(reconstruct_response({s1}) == "The brand is Yamaha.");
}

TEST_CASE("round trip preserves unknown fields and bytes") {
  json j = json::parse(kFlat);
  j["extra_top"] = 42;
  j["trajectory"][0]["latency_ms"] = 17;
  j["solution"]["sentence"][0]["confidence"] = 0.5;
  Record r = parse_record(j.dump());
  std::string out = serialize_record(r);
  Record r2 = parse_record(out);
  CHECK(record_equal(r, r2));
  json round = json::parse(out);
  CHECK(round["extra_top"] == 42);
  CHECK(round["trajectory"][0]["latency_ms"] == 17);
  CHECK(round["solution"]["sentence"][0]["confidence"] == 0.5);
  // Observation bytes untouched, including leading/trailing whitespace.
  json ws = json::parse(kFlat);
  ws["trajectory"][0]["output"] = "  padded \n";
  Record rw = parse_record(ws.dump());
  CHECK(rw.trajectory[0].observation == "  padded \n");
}

TEST_CASE("golden record fixture parses") {
  std::ifstream in("data/golden_record.jsonl");
  REQUIRE(in.good());
  std::string line;
  REQUIRE(std::getline(in, line));
  Record r = parse_record(line);
  CHECK(r.instance.id == "golden-1");
  CHECK(r.trajectory.size() == 2);
  CHECK(r.solution.sentences.size() == 3);
}
