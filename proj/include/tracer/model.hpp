#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace tracer {

using json = nlohmann::json;

// The seven-tool inventory. Anything else parses to Unknown with the
// original name preserved.
enum class Tool {
  ImageDescription,
  OCR,
  TextToBbox,
  RegionAttributeDescription,
  CountGivenObject,
  GoogleSearch,
  Calculator,
  Unknown,
};

constexpr int kToolCount = 7;

std::string_view tool_name(Tool t);
Tool parse_tool(std::string_view name);
const std::vector<Tool>& tool_inventory();

enum class Relation { Quotation, Compression, Inference };

std::string_view relation_name(Relation r);
std::optional<Relation> parse_relation(std::string_view name);

enum class TurnIdMode { PerTool, Global };
enum class FormatMode { Auto, Flat, Wrapped };

struct ToolTurn {
  int position = 0;  // 1-based
  std::string name;  // raw tool name as written in the record
  Tool tool = Tool::Unknown;
  std::optional<std::string> thought;
  std::string args;
  std::string observation;
  bool error_flag = false;
  std::string turn_id;  // assigned by assign_turn_ids
  json extra = json::object();
};

struct ProvenanceItem {
  std::string tool_id;
  std::string source_text;
  std::optional<Relation> relation;  // empty only under lenient parsing
  std::string relation_raw;
  json extra = json::object();
};

struct SentenceRecord {
  int sentence_id = 0;
  std::string text;
  std::vector<ProvenanceItem> provenance;
  json extra = json::object();
};

struct Solution {
  std::string response;
  std::vector<SentenceRecord> sentences;
  json extra = json::object();
};

struct Instance {
  std::string id;
  std::string question;
  std::vector<std::string> images;
  std::optional<std::vector<std::string>> history;
  std::vector<Tool> tools_available;  // empty means the full inventory
  std::string gold_answer;
};

struct Record {
  Instance instance;
  std::vector<ToolTurn> trajectory;
  Solution solution;
  json extra = json::object();
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind { MalformedSyntax, MissingField, WrongType };

  ParseError(Kind kind, std::string path, std::string record_id = {})
      : std::runtime_error(describe(kind, path, record_id)),
        kind_(kind),
        path_(std::move(path)),
        record_id_(std::move(record_id)) {}

  Kind kind() const { return kind_; }
  const std::string& path() const { return path_; }
  const std::string& record_id() const { return record_id_; }

 private:
  static std::string describe(Kind kind, const std::string& path,
                              const std::string& record_id);
  Kind kind_;
  std::string path_;
  std::string record_id_;
};

struct ParseOptions {
  FormatMode format = FormatMode::Auto;
  // When false, unrecognized relation labels are preserved for the verifier
  // to fault instead of failing the parse.
  bool strict_relations = true;
};

Record parse_record(const std::string& line, const ParseOptions& opts = {});

// Canonical flat-form serialization, one line, no trailing newline.
std::string serialize_record(const Record& record);

json record_to_json(const Record& record);

std::vector<ToolTurn> assign_turn_ids(std::vector<ToolTurn> trajectory,
                                      TurnIdMode mode = TurnIdMode::PerTool);

// Sentence texts joined by a single space in id order.
std::string reconstruct_response(const std::vector<SentenceRecord>& sentences);

bool record_equal(const Record& a, const Record& b);

}  // namespace tracer
