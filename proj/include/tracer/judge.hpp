#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracer/model.hpp"

namespace tracer {

class JudgeError : public std::runtime_error {
 public:
  enum class Kind { Transport, SchemaInvalid };

  JudgeError(Kind kind, const std::string& what, std::string raw_reply = {})
      : std::runtime_error(what), kind_(kind), raw_reply_(std::move(raw_reply)) {}

  Kind kind() const { return kind_; }
  // Preserved verbatim for audit when the reply could not be parsed.
  const std::string& raw_reply() const { return raw_reply_; }

 private:
  Kind kind_;
  std::string raw_reply_;
};

struct SentenceCheck {
  int sentence_id = 0;
  bool tool_id_correct = false;
  bool source_text_correct = false;
  bool relation_correct = false;
  bool sentence_correct = false;
};

struct JudgeVerdict {
  bool overall_correct = false;
  std::vector<std::string> error_details;
  std::vector<SentenceCheck> sentence_check;

  json to_json() const;
  static JudgeVerdict from_json(const json& j);
};

// Relation-rationality judging for one (source, claim, relation) triple.
class RelationJudge {
 public:
  virtual ~RelationJudge() = default;
  // Returns 0/1; throws JudgeError when no verdict can be produced.
  virtual int judge_relation(const std::string& source, const std::string& claim,
                             Relation relation) = 0;
};

// Whole-record judging per the verification protocol.
class RecordJudge {
 public:
  virtual ~RecordJudge() = default;
  virtual JudgeVerdict judge_record(const Record& record) = 0;
};

struct RuleJudgeThresholds {
  double quotation_token_containment = 0.90;
  double compression_recall = 0.70;
  double inference_recall = 0.30;
};

// Deterministic rule judge. Pure function of its inputs and thresholds.
class RuleJudge : public RelationJudge, public RecordJudge {
 public:
  explicit RuleJudge(RuleJudgeThresholds thresholds = {}) : thresholds_(thresholds) {}

  int judge_relation(const std::string& source, const std::string& claim,
                     Relation relation) override;
  JudgeVerdict judge_record(const Record& record) override;

  const RuleJudgeThresholds& thresholds() const { return thresholds_; }

 private:
  RuleJudgeThresholds thresholds_;
};

// Scripted judge for tests: verdicts keyed by record id, relation outcomes
// keyed by (source, claim, relation).
class ScriptedJudge : public RelationJudge, public RecordJudge {
 public:
  void set_record_verdict(const std::string& record_id, JudgeVerdict verdict);
  // Marks a record id as failing with the given faulty sentence/field.
  void reject_sentence(const std::string& record_id, int sentence_id,
                       const std::string& field, const std::string& detail);
  void set_relation_verdict(const std::string& source, const std::string& claim,
                            Relation relation, int verdict);
  void set_default_relation_verdict(int verdict) { default_relation_ = verdict; }
  // Record ids listed here raise JudgeError (simulated outage).
  void set_unavailable(const std::string& record_id);

  int judge_relation(const std::string& source, const std::string& claim,
                     Relation relation) override;
  JudgeVerdict judge_record(const Record& record) override;

 private:
  std::map<std::string, JudgeVerdict> record_verdicts_;
  std::map<std::string, int> relation_verdicts_;
  std::map<std::string, bool> unavailable_;
  int default_relation_ = 1;
};

struct RemoteJudgeConfig {
  std::string endpoint;  // e.g. http://host:port/v1/chat/completions
  std::string model;
  std::string api_key;         // usually from TRACER_JUDGE_API_KEY
  std::string cache_dir;       // empty disables caching
  int max_retries = 3;
  int retry_backoff_ms = 250;  // doubled per attempt
  double temperature = 0.0;
  int timeout_sec = 60;
};

// HTTP judge speaking the chat-completions shape. Replies are cached by a
// content hash of the request so re-runs are reproducible.
class RemoteJudge : public RelationJudge, public RecordJudge {
 public:
  explicit RemoteJudge(RemoteJudgeConfig config);
  ~RemoteJudge() override;

  int judge_relation(const std::string& source, const std::string& claim,
                     Relation relation) override;
  JudgeVerdict judge_record(const Record& record) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Extracts the first well-formed JSON object embedded in possibly-noisy
// judge prose. Throws JudgeError{SchemaInvalid} when none exists.
json extract_json_object(const std::string& reply);

// The system prompt sent to the remote judge.
const std::string& judge_system_prompt();

// Stable content hash used for the judge reply cache.
std::string content_hash(const std::string& payload);

}  // namespace tracer
