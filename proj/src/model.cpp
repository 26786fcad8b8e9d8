#include "tracer/model.hpp"

#include <map>

#include "tracer/text.hpp"

namespace tracer {

namespace {

constexpr std::string_view kToolNames[] = {
    "ImageDescription", "OCR",           "TextToBbox", "RegionAttributeDescription",
    "CountGivenObject", "GoogleSearch",  "Calculator"};

const json& require(const json& obj, const char* key, const std::string& path,
                    const std::string& record_id) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(ParseError::Kind::MissingField, path, record_id);
  }
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& path,
                           const std::string& record_id) {
  const json& v = require(obj, key, path, record_id);
  if (!v.is_string()) {
    throw ParseError(ParseError::Kind::WrongType, path, record_id);
  }
  return v.get<std::string>();
}

json extras_of(const json& obj, std::initializer_list<std::string_view> known) {
  json extra = json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (auto k : known) {
      if (it.key() == k) {
        is_known = true;
        break;
      }
    }
    if (!is_known) extra[it.key()] = it.value();
  }
  return extra;
}

ProvenanceItem parse_item(const json& j, const std::string& path,
                          const std::string& record_id, bool strict_relations) {
  if (!j.is_object()) throw ParseError(ParseError::Kind::WrongType, path, record_id);
  ProvenanceItem item;
  item.tool_id = require_string(j, "tool_id", path + ".tool_id", record_id);
  item.source_text = require_string(j, "source_text", path + ".source_text", record_id);
  item.relation_raw = require_string(j, "relation", path + ".relation", record_id);
  item.relation = parse_relation(item.relation_raw);
  if (!item.relation && strict_relations) {
    throw ParseError(ParseError::Kind::WrongType, path + ".relation", record_id);
  }
  item.extra = extras_of(j, {"tool_id", "source_text", "relation"});
  return item;
}

Solution parse_solution(const json& j, const std::string& path,
                        const std::string& record_id, bool strict_relations) {
  if (!j.is_object()) throw ParseError(ParseError::Kind::WrongType, path, record_id);
  Solution sol;
  sol.response = require_string(j, "response", path + ".response", record_id);
  const json& sentences = require(j, "sentence", path + ".sentence", record_id);
  if (!sentences.is_array()) {
    throw ParseError(ParseError::Kind::WrongType, path + ".sentence", record_id);
  }
  int idx = 0;
  for (const auto& sj : sentences) {
    std::string spath = path + ".sentence[" + std::to_string(idx) + "]";
    if (!sj.is_object()) throw ParseError(ParseError::Kind::WrongType, spath, record_id);
    SentenceRecord s;
    const json& sid = require(sj, "sentence_id", spath + ".sentence_id", record_id);
    if (!sid.is_number_integer()) {
      throw ParseError(ParseError::Kind::WrongType, spath + ".sentence_id", record_id);
    }
    s.sentence_id = sid.get<int>();
    s.text = require_string(sj, "text", spath + ".text", record_id);
    const json& prov = require(sj, "provenance", spath + ".provenance", record_id);
    if (!prov.is_array()) {
      throw ParseError(ParseError::Kind::WrongType, spath + ".provenance", record_id);
    }
    int pidx = 0;
    for (const auto& pj : prov) {
      s.provenance.push_back(parse_item(
          pj, spath + ".provenance[" + std::to_string(pidx) + "]", record_id,
          strict_relations));
      ++pidx;
    }
    s.extra = extras_of(sj, {"sentence_id", "text", "provenance"});
    sol.sentences.push_back(std::move(s));
    ++idx;
  }
  sol.extra = extras_of(j, {"response", "sentence", "role", "content"});
  return sol;
}

}  // namespace

std::string ParseError::describe(Kind kind, const std::string& path,
                                 const std::string& record_id) {
  std::string_view what;
  switch (kind) {
    case Kind::MalformedSyntax: what = "malformed-syntax"; break;
    case Kind::MissingField: what = "missing-field"; break;
    case Kind::WrongType: what = "wrong-type"; break;
  }
  std::string msg{what};
  if (!path.empty()) msg += " at " + path;
  if (!record_id.empty()) msg += " (record " + record_id + ")";
  return msg;
}

std::string_view tool_name(Tool t) {
  if (t == Tool::Unknown) return "Unknown";
  return kToolNames[static_cast<int>(t)];
}

Tool parse_tool(std::string_view name) {
  for (int i = 0; i < kToolCount; ++i) {
    if (kToolNames[i] == name) return static_cast<Tool>(i);
  }
  return Tool::Unknown;
}

const std::vector<Tool>& tool_inventory() {
  static const std::vector<Tool> inv = {
      Tool::ImageDescription, Tool::OCR,          Tool::TextToBbox,
      Tool::RegionAttributeDescription, Tool::CountGivenObject,
      Tool::GoogleSearch,     Tool::Calculator};
  return inv;
}

std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::Quotation: return "Quotation";
    case Relation::Compression: return "Compression";
    case Relation::Inference: return "Inference";
  }
  return "";
}

std::optional<Relation> parse_relation(std::string_view name) {
  if (name == "Quotation") return Relation::Quotation;
  if (name == "Compression") return Relation::Compression;
  if (name == "Inference") return Relation::Inference;
  return std::nullopt;
}

Record parse_record(const std::string& line, const ParseOptions& opts) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ParseError(ParseError::Kind::MalformedSyntax, "$");
  }

  Record rec;
  auto idit = j.find("id");
  if (idit != j.end() && idit->is_string()) rec.instance.id = idit->get<std::string>();
  const std::string& rid = rec.instance.id;

  rec.instance.question = require_string(j, "question", "$.question", rid);
  rec.instance.gold_answer = require_string(j, "answer", "$.answer", rid);
  if (auto it = j.find("images"); it != j.end()) {
    if (!it->is_array()) throw ParseError(ParseError::Kind::WrongType, "$.images", rid);
    for (const auto& im : *it) {
      if (!im.is_string()) throw ParseError(ParseError::Kind::WrongType, "$.images", rid);
      rec.instance.images.push_back(im.get<std::string>());
    }
  }
  if (auto it = j.find("history"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError(ParseError::Kind::WrongType, "$.history", rid);
    std::vector<std::string> hist;
    for (const auto& h : *it) {
      if (!h.is_string()) throw ParseError(ParseError::Kind::WrongType, "$.history", rid);
      hist.push_back(h.get<std::string>());
    }
    rec.instance.history = std::move(hist);
  }
  if (auto it = j.find("tools"); it != j.end()) {
    if (!it->is_array()) throw ParseError(ParseError::Kind::WrongType, "$.tools", rid);
    for (const auto& t : *it) {
      if (!t.is_string()) throw ParseError(ParseError::Kind::WrongType, "$.tools", rid);
      rec.instance.tools_available.push_back(parse_tool(t.get<std::string>()));
    }
  }

  if (auto it = j.find("trajectory"); it != j.end()) {
    if (!it->is_array()) throw ParseError(ParseError::Kind::WrongType, "$.trajectory", rid);
    int pos = 1;
    for (const auto& tj : *it) {
      std::string tpath = "$.trajectory[" + std::to_string(pos - 1) + "]";
      if (!tj.is_object()) throw ParseError(ParseError::Kind::WrongType, tpath, rid);
      ToolTurn turn;
      turn.position = pos++;
      turn.name = require_string(tj, "name", tpath + ".name", rid);
      turn.tool = parse_tool(turn.name);
      if (auto th = tj.find("thought"); th != tj.end() && th->is_string()) {
        turn.thought = th->get<std::string>();
      }
      turn.args = require_string(tj, "input", tpath + ".input", rid);
      turn.observation = require_string(tj, "output", tpath + ".output", rid);
      if (auto ef = tj.find("error"); ef != tj.end()) {
        if (!ef->is_boolean()) {
          throw ParseError(ParseError::Kind::WrongType, tpath + ".error", rid);
        }
        turn.error_flag = ef->get<bool>();
      }
      turn.extra = extras_of(tj, {"name", "thought", "input", "output", "error"});
      rec.trajectory.push_back(std::move(turn));
    }
  }

  const json& sol = require(j, "solution", "$.solution", rid);
  const json* body = &sol;
  bool wrapped = sol.is_object() && sol.contains("role") && sol.contains("content");
  switch (opts.format) {
    case FormatMode::Flat:
      wrapped = false;
      break;
    case FormatMode::Wrapped:
      if (!wrapped) throw ParseError(ParseError::Kind::MissingField, "$.solution.content", rid);
      break;
    case FormatMode::Auto:
      break;
  }
  if (wrapped) {
    body = &require(sol, "content", "$.solution.content", rid);
  }
  rec.solution = parse_solution(*body, "$.solution", rid, opts.strict_relations);

  rec.extra = extras_of(j, {"id", "question", "answer", "images", "history", "tools",
                            "trajectory", "solution"});
  rec.trajectory = assign_turn_ids(std::move(rec.trajectory));
  return rec;
}

json record_to_json(const Record& record) {
  json j = record.extra;
  j["id"] = record.instance.id;
  j["question"] = record.instance.question;
  j["answer"] = record.instance.gold_answer;
  j["images"] = record.instance.images;
  if (record.instance.history) j["history"] = *record.instance.history;
  if (!record.instance.tools_available.empty()) {
    json tools = json::array();
    for (Tool t : record.instance.tools_available) tools.push_back(std::string(tool_name(t)));
    j["tools"] = tools;
  }
  json traj = json::array();
  for (const auto& turn : record.trajectory) {
    json tj = turn.extra;
    tj["name"] = turn.name;
    if (turn.thought) tj["thought"] = *turn.thought;
    tj["input"] = turn.args;
    tj["output"] = turn.observation;
    if (turn.error_flag) tj["error"] = true;
    traj.push_back(std::move(tj));
  }
  j["trajectory"] = std::move(traj);

  json sol = record.solution.extra;
  sol["response"] = record.solution.response;
  json sentences = json::array();
  for (const auto& s : record.solution.sentences) {
    json sj = s.extra;
    sj["sentence_id"] = s.sentence_id;
    sj["text"] = s.text;
    json prov = json::array();
    for (const auto& p : s.provenance) {
      json pj = p.extra;
      pj["tool_id"] = p.tool_id;
      pj["source_text"] = p.source_text;
      pj["relation"] = p.relation ? std::string(relation_name(*p.relation)) : p.relation_raw;
      prov.push_back(std::move(pj));
    }
    sj["provenance"] = std::move(prov);
    sentences.push_back(std::move(sj));
  }
  sol["sentence"] = std::move(sentences);
  j["solution"] = std::move(sol);
  return j;
}

std::string serialize_record(const Record& record) {
  return record_to_json(record).dump();
}

std::vector<ToolTurn> assign_turn_ids(std::vector<ToolTurn> trajectory, TurnIdMode mode) {
  std::map<std::string, int> per_tool;
  for (auto& turn : trajectory) {
    std::string base = turn.name.empty() ? std::string("Unknown") : turn.name;
    int k;
    if (mode == TurnIdMode::PerTool) {
      k = ++per_tool[base];
    } else {
      k = turn.position;
    }
    turn.turn_id = base + "_" + std::to_string(k);
  }
  return trajectory;
}

std::string reconstruct_response(const std::vector<SentenceRecord>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out.push_back(' ');
    out += s.text;
  }
  return out;
}

bool record_equal(const Record& a, const Record& b) {
  return record_to_json(a) == record_to_json(b);
}

}  // namespace tracer
