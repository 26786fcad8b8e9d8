#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tracer/judge.hpp"
#include "tracer/model.hpp"

namespace tracer {

// Fixed fault-code vocabulary used in reports and filter decisions.
namespace fault {
inline constexpr const char* kGapInIds = "gap-in-ids";
inline constexpr const char* kMissingProvenance = "missing-provenance";
inline constexpr const char* kBadRelationLabel = "bad-relation-label";
inline constexpr const char* kReconstructionMismatch = "reconstruction-mismatch";
inline constexpr const char* kUnknownTurn = "unknown-turn";
inline constexpr const char* kSourceNotSubstring = "source-not-substring";
inline constexpr const char* kEmptySource = "empty-source";
inline constexpr const char* kRelationRejected = "relation-rejected";
inline constexpr const char* kJudgeUnavailable = "judge-unavailable";
}  // namespace fault

struct ItemVerdict {
  int sentence_id = 0;
  int item_index = 0;
  int v_turn = 0;
  int v_src = 0;
  int v_rel = 0;
  int v = 0;
  std::vector<std::string> reasons;
};

struct VerificationReport {
  int c_schema = 0;
  std::vector<ItemVerdict> verdicts;
  int r_trace = 0;
  std::vector<std::string> schema_faults;
  // Set when a judge failure left verification incomplete.
  bool incomplete = false;

  json to_json() const;
  static VerificationReport from_json(const json& j);
};

struct VerifyOptions {
  // Byte-exact substring matching by default; whitespace-tolerant matching
  // for corpora serialized lossily.
  bool ws_tolerant_source = false;
};

struct SchemaResult {
  int c_schema = 0;
  std::vector<std::string> faults;
};

SchemaResult check_schema(const Solution& solution);

struct TurnResult {
  int v_turn = 0;
  const ToolTurn* turn = nullptr;
};

TurnResult check_turn(const ProvenanceItem& item, const std::vector<ToolTurn>& trajectory);

int check_source(const ProvenanceItem& item, const ToolTurn& turn,
                 const VerifyOptions& opts = {});

int check_relation(const ProvenanceItem& item, const SentenceRecord& sentence,
                   RelationJudge& judge);

VerificationReport verify(const Record& record, RelationJudge& judge,
                          const VerifyOptions& opts = {});

}  // namespace tracer
