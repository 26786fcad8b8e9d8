#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tracer/judge.hpp"
#include "tracer/model.hpp"
#include "tracer/reward.hpp"
#include "tracer/verify.hpp"

namespace tracer {

struct FilterDecision {
  std::string record_id;
  int stage = 0;  // 1, 2 or 3
  bool kept = false;
  bool parked = false;  // external failure, neither kept nor dropped
  std::vector<std::string> reasons;

  json to_json() const;
};

enum class MaskMode { Span, Turn };
enum class DropRule { PerRecord, PerCitation };

inline constexpr const char* kMaskToken = "[MASKED]";

// Maps (instance, masked trajectory) to a regenerated solution.
using Regenerator =
    std::function<Solution(const Instance&, const std::vector<ToolTurn>&)>;

struct PipelineConfig {
  RewardWeights weights;
  MatchMode match_mode = MatchMode::Containment;
  MaskMode mask_mode = MaskMode::Span;
  DropRule drop_rule = DropRule::PerRecord;
  VerifyOptions verify;
};

struct RetentionReport {
  size_t input_count = 0;
  size_t stage1_kept = 0;
  size_t stage2_kept = 0;
  size_t stage3_kept = 0;
  size_t parked = 0;

  double stage1_retention() const;
  double stage2_retention() const;
  double stage3_retention() const;
  double overall_retention() const;

  static double retention(size_t out, size_t in);

  json to_json() const;
};

struct CorpusStats {
  size_t example_count = 0;
  size_t total_tool_calls = 0;
  std::map<std::string, size_t> per_tool_calls;
  std::map<std::string, size_t> per_relation_counts;
  size_t total_provenance_records = 0;
  size_t total_sentences = 0;
  double avg_records_per_example = 0.0;
  double avg_records_per_sentence = 0.0;
  double avg_query_length = 0.0;
  double avg_response_length = 0.0;
  bool empty_corpus = false;

  json to_json() const;
};

FilterDecision stage1(const Record& record, const PipelineConfig& config = {});

// Replaces the cited evidence unit by the mask token; all other turns are
// byte-identical.
std::vector<ToolTurn> mask_evidence(const std::vector<ToolTurn>& trajectory,
                                    const ProvenanceItem& item, MaskMode mode);

// In DropRule::PerCitation mode, `pruned_out` (when non-null) receives a copy
// of the record with insensitive citations removed; a sentence always keeps
// at least one item so the schema stays valid.
FilterDecision stage2(const Record& record, const Regenerator& regenerator,
                      const PipelineConfig& config = {}, Record* pruned_out = nullptr);

FilterDecision stage3(const Record& record, RecordJudge& judge);

struct PipelineResult {
  std::vector<Record> kept;
  std::vector<Record> parked;
  std::vector<FilterDecision> decisions;
  RetentionReport report;
};

PipelineResult run_pipeline(const std::vector<Record>& corpus, const PipelineConfig& config,
                            const Regenerator& regenerator, RecordJudge& judge);

CorpusStats compute_stats(const std::vector<Record>& corpus);

// Canonical equality used by the stage-2 "unchanged" test: answer evals agree
// and the provenance graphs are structurally equal (source text compared
// after whitespace normalization).
bool solutions_equivalent(const Solution& a, const Solution& b, const std::string& gold,
                          MatchMode mode);

// Scripted regenerators for tests and dry runs.
Regenerator identity_regenerator(const Record& record);
Regenerator always_sensitive_regenerator(const Record& record);

}  // namespace tracer
