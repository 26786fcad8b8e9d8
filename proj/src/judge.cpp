#include "tracer/judge.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "tracer/text.hpp"
#include "tracer/verify.hpp"

namespace tracer {

json JudgeVerdict::to_json() const {
  json j;
  j["overall_correct"] = overall_correct;
  j["error_details"] = error_details;
  json checks = json::array();
  for (const auto& c : sentence_check) {
    checks.push_back({{"sentence_id", c.sentence_id},
                      {"tool_id_correct", c.tool_id_correct},
                      {"source_text_correct", c.source_text_correct},
                      {"relation_correct", c.relation_correct},
                      {"sentence_correct", c.sentence_correct}});
  }
  j["sentence_check"] = std::move(checks);
  return j;
}

JudgeVerdict JudgeVerdict::from_json(const json& j) {
  JudgeVerdict v;
  if (!j.is_object() || !j.contains("overall_correct") ||
      !j.at("overall_correct").is_boolean()) {
    throw JudgeError(JudgeError::Kind::SchemaInvalid, "judge reply missing overall_correct",
                     j.dump());
  }
  v.overall_correct = j.at("overall_correct").get<bool>();
  for (const auto& e : j.value("error_details", json::array())) {
    if (e.is_string()) v.error_details.push_back(e.get<std::string>());
  }
  for (const auto& cj : j.value("sentence_check", json::array())) {
    SentenceCheck c;
    c.sentence_id = cj.value("sentence_id", 0);
    c.tool_id_correct = cj.value("tool_id_correct", false);
    c.source_text_correct = cj.value("source_text_correct", false);
    c.relation_correct = cj.value("relation_correct", false);
    c.sentence_correct = cj.value("sentence_correct", false);
    v.sentence_check.push_back(c);
  }
  return v;
}

int RuleJudge::judge_relation(const std::string& source, const std::string& claim,
                              Relation relation) {
  const std::string norm_source = text::normalize_loose(source);
  const std::string norm_claim = text::normalize_loose(claim);
  const auto source_tokens = text::tokenize(norm_source);
  const auto claim_tokens = text::tokenize(norm_claim);
  const auto source_content = text::content_tokens(source);
  const auto claim_content = text::content_tokens(claim);

  const bool verbatim = text::contains(norm_source, norm_claim);
  const bool quotation_like =
      verbatim || text::token_containment(claim_tokens, source_tokens) >=
                      thresholds_.quotation_token_containment;
  const double recall = text::token_recall(claim_content, source_content);

  switch (relation) {
    case Relation::Quotation:
      return quotation_like ? 1 : 0;
    case Relation::Compression:
      // A verbatim copy is a quotation, not a compression; a shuffled or
      // subsampled claim may still compress.
      return (!verbatim && claim_tokens.size() < source_tokens.size() &&
              recall >= thresholds_.compression_recall)
                 ? 1
                 : 0;
    case Relation::Inference:
      return recall >= thresholds_.inference_recall ? 1 : 0;
  }
  return 0;
}

JudgeVerdict RuleJudge::judge_record(const Record& record) {
  JudgeVerdict verdict;
  verdict.overall_correct = true;
  for (const auto& sentence : record.solution.sentences) {
    SentenceCheck check;
    check.sentence_id = sentence.sentence_id;
    check.tool_id_correct = true;
    check.source_text_correct = true;
    check.relation_correct = true;
    for (const auto& item : sentence.provenance) {
      TurnResult turn = check_turn(item, record.trajectory);
      if (!turn.v_turn) {
        check.tool_id_correct = false;
        verdict.error_details.push_back("sentence " + std::to_string(sentence.sentence_id) +
                                        ": unknown tool turn " + item.tool_id);
        continue;
      }
      if (!check_source(item, *turn.turn)) {
        check.source_text_correct = false;
        verdict.error_details.push_back("sentence " + std::to_string(sentence.sentence_id) +
                                        ": source not traceable to " + item.tool_id);
        continue;
      }
      if (!item.relation || !judge_relation(item.source_text, sentence.text, *item.relation)) {
        check.relation_correct = false;
        verdict.error_details.push_back("sentence " + std::to_string(sentence.sentence_id) +
                                        ": relation not supported");
      }
    }
    if (sentence.provenance.empty()) {
      check.source_text_correct = false;
      verdict.error_details.push_back("sentence " + std::to_string(sentence.sentence_id) +
                                      ": missing provenance");
    }
    check.sentence_correct =
        check.tool_id_correct && check.source_text_correct && check.relation_correct;
    if (!check.sentence_correct) verdict.overall_correct = false;
    verdict.sentence_check.push_back(check);
  }
  return verdict;
}

void ScriptedJudge::set_record_verdict(const std::string& record_id, JudgeVerdict verdict) {
  record_verdicts_[record_id] = std::move(verdict);
}

void ScriptedJudge::reject_sentence(const std::string& record_id, int sentence_id,
                                    const std::string& field, const std::string& detail) {
  JudgeVerdict v;
  v.overall_correct = false;
  v.error_details.push_back(detail);
  SentenceCheck c;
  c.sentence_id = sentence_id;
  c.tool_id_correct = field != "tool_id";
  c.source_text_correct = field != "source_text";
  c.relation_correct = field != "relation";
  c.sentence_correct = false;
  v.sentence_check.push_back(c);
  record_verdicts_[record_id] = std::move(v);
}

void ScriptedJudge::set_relation_verdict(const std::string& source, const std::string& claim,
                                         Relation relation, int verdict) {
  relation_verdicts_[source + "\x1f" + claim + "\x1f" + std::string(relation_name(relation))] =
      verdict;
}

void ScriptedJudge::set_unavailable(const std::string& record_id) {
  unavailable_[record_id] = true;
}

int ScriptedJudge::judge_relation(const std::string& source, const std::string& claim,
                                  Relation relation) {
  auto it = relation_verdicts_.find(source + "\x1f" + claim + "\x1f" +
                                    std::string(relation_name(relation)));
  if (it != relation_verdicts_.end()) return it->second;
  return default_relation_;
}

JudgeVerdict ScriptedJudge::judge_record(const Record& record) {
  if (unavailable_.count(record.instance.id)) {
    throw JudgeError(JudgeError::Kind::Transport, "scripted outage for record " +
                                                      record.instance.id);
  }
  auto it = record_verdicts_.find(record.instance.id);
  if (it != record_verdicts_.end()) return it->second;
  // Default: approve with a full set of passing sentence bits.
  JudgeVerdict v;
  v.overall_correct = true;
  for (const auto& s : record.solution.sentences) {
    v.sentence_check.push_back({s.sentence_id, true, true, true, true});
  }
  return v;
}

json extract_json_object(const std::string& reply) {
  for (size_t start = 0; start < reply.size(); ++start) {
    if (reply[start] != '{') continue;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < reply.size(); ++i) {
      char c = reply[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          json candidate =
              json::parse(reply.substr(start, i - start + 1), nullptr, false);
          if (!candidate.is_discarded() && candidate.is_object()) return candidate;
          break;  // resume scanning after this opening brace
        }
      }
    }
  }
  throw JudgeError(JudgeError::Kind::SchemaInvalid, "no JSON object in judge reply", reply);
}

const std::string& judge_system_prompt() {
  static const std::string prompt =
      "You judge whether the provenance attached to a model answer is completely "
      "correct given the recorded multi-round tool interaction history.\n"
      "Apply three rules. 1) Tool and round validation: each tool_id has the form "
      "ToolName_Number where Number is the N-th call of that tool, counted from 1, "
      "and must be consistent with the recorded tool-call order. 2) Source "
      "authenticity: each source_text must come verbatim from the cited turn's "
      "tool output; fabricated, spliced, replaced, or non-existent content fails. "
      "3) Relation rationality: Quotation means the sentence is directly "
      "copied or extracted from source_text; Compression means it simplifies or "
      "summarizes source_text; Inference means it is derived from source_text by "
      "reasonable deduction.\n"
      "Output only a JSON object of the form {\"overall_correct\": true/false, "
      "\"error_details\": [..], \"sentence_check\": [{\"sentence_id\": n, "
      "\"tool_id_correct\": bool, \"source_text_correct\": bool, "
      "\"relation_correct\": bool, \"sentence_correct\": bool}]} covering every "
      "sentence exactly once.";
  return prompt;
}

std::string content_hash(const std::string& payload) {
  // FNV-1a, 64-bit; stable across runs and platforms.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct RemoteJudge::Impl {
  RemoteJudgeConfig config;
  std::string host;
  std::string path;
  std::mutex cache_mutex;

  explicit Impl(RemoteJudgeConfig cfg) : config(std::move(cfg)) {
    std::string url = config.endpoint;
    auto scheme = url.find("://");
    if (scheme != std::string::npos) url = url.substr(scheme + 3);
    auto slash = url.find('/');
    host = "http://" + (slash == std::string::npos ? url : url.substr(0, slash));
    path = slash == std::string::npos ? "/v1/chat/completions" : url.substr(slash);
  }

  std::optional<std::string> cache_get(const std::string& key) {
    if (config.cache_dir.empty()) return std::nullopt;
    std::lock_guard lock(cache_mutex);
    std::ifstream in(std::filesystem::path(config.cache_dir) / (key + ".json"));
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void cache_put(const std::string& key, const std::string& value) {
    if (config.cache_dir.empty()) return;
    std::lock_guard lock(cache_mutex);
    std::filesystem::create_directories(config.cache_dir);
    auto final_path = std::filesystem::path(config.cache_dir) / (key + ".json");
    auto tmp_path = final_path;
    tmp_path += ".tmp";
    std::ofstream(tmp_path) << value;
    std::filesystem::rename(tmp_path, final_path);
  }

  std::string complete(const std::string& user_content) {
    json body = {
        {"model", config.model},
        {"messages",
         json::array({{{"role", "system"}, {"content", judge_system_prompt()}},
                      {{"role", "user"}, {"content", user_content}}})},
        {"temperature", config.temperature}};
    const std::string payload = body.dump();
    const std::string key = content_hash(payload);
    if (auto cached = cache_get(key)) return *cached;

    std::string last_error;
    int backoff = config.retry_backoff_ms;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        backoff *= 2;
      }
      httplib::Client client(host);
      client.set_read_timeout(config.timeout_sec, 0);
      httplib::Headers headers;
      if (!config.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config.api_key);
      }
      auto res = client.Post(path, headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "server error " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw JudgeError(JudgeError::Kind::Transport,
                         "judge endpoint returned " + std::to_string(res->status), res->body);
      }
      json reply = json::parse(res->body, nullptr, false);
      if (reply.is_discarded()) {
        throw JudgeError(JudgeError::Kind::SchemaInvalid, "judge reply is not JSON",
                         res->body);
      }
      std::string content;
      try {
        content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception&) {
        throw JudgeError(JudgeError::Kind::SchemaInvalid,
                         "judge reply missing choices[0].message.content", res->body);
      }
      cache_put(key, content);
      return content;
    }
    throw JudgeError(JudgeError::Kind::Transport,
                     "judge unreachable after " + std::to_string(config.max_retries + 1) +
                         " attempts: " + last_error);
  }
};

RemoteJudge::RemoteJudge(RemoteJudgeConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

RemoteJudge::~RemoteJudge() = default;

int RemoteJudge::judge_relation(const std::string& source, const std::string& claim,
                                Relation relation) {
  json request = {{"source_text", source},
                  {"claim", claim},
                  {"relation", std::string(relation_name(relation))},
                  {"task",
                   "Judge whether the declared relation correctly describes how the claim "
                   "is supported by source_text. Output only {\"relation_correct\": "
                   "true/false}."}};
  std::string content = impl_->complete(request.dump());
  json obj = extract_json_object(content);
  if (!obj.contains("relation_correct") || !obj.at("relation_correct").is_boolean()) {
    throw JudgeError(JudgeError::Kind::SchemaInvalid, "judge reply missing relation_correct",
                     content);
  }
  return obj.at("relation_correct").get<bool>() ? 1 : 0;
}

JudgeVerdict RemoteJudge::judge_record(const Record& record) {
  json input;
  input["images"] = record.instance.images;
  json tools = json::array();
  for (Tool t : record.instance.tools_available) tools.push_back(std::string(tool_name(t)));
  input["tools"] = tools;
  json messages = json::array();
  messages.push_back({{"role", "user"}, {"content", record.instance.question}});
  for (const auto& turn : record.trajectory) {
    messages.push_back({{"role", "assistant"},
                        {"tool_call", {{"name", turn.name}, {"input", turn.args}}}});
    messages.push_back({{"role", "tool"}, {"tool_response", turn.observation}});
  }
  input["messages"] = std::move(messages);
  json sol;
  sol["response"] = record.solution.response;
  json sentences = json::array();
  for (const auto& s : record.solution.sentences) {
    json prov = json::array();
    for (const auto& p : s.provenance) {
      prov.push_back({{"tool_id", p.tool_id},
                      {"source_text", p.source_text},
                      {"relation", p.relation ? std::string(relation_name(*p.relation))
                                              : p.relation_raw}});
    }
    sentences.push_back(
        {{"sentence_id", s.sentence_id}, {"text", s.text}, {"provenance", prov}});
  }
  sol["sentence"] = std::move(sentences);
  input["solution"] = std::move(sol);

  std::string content = impl_->complete(input.dump());
  return JudgeVerdict::from_json(extract_json_object(content));
}

}  // namespace tracer
