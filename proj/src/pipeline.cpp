#include "tracer/pipeline.hpp"

#include <algorithm>

#include "tracer/text.hpp"

namespace tracer {

namespace {

std::string replace_all(std::string haystack, const std::string& needle,
                        const std::string& replacement) {
  if (needle.empty()) return haystack;
  size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    haystack.replace(pos, needle.size(), replacement);
    pos += replacement.size();
  }
  return haystack;
}

// Cited units eligible for counterfactual masking: the turn resolves and the
// source is an authentic substring.
std::vector<const ProvenanceItem*> maskable_items(const Record& record) {
  std::vector<const ProvenanceItem*> items;
  for (const auto& s : record.solution.sentences) {
    for (const auto& p : s.provenance) {
      TurnResult turn = check_turn(p, record.trajectory);
      if (turn.v_turn && check_source(p, *turn.turn)) items.push_back(&p);
    }
  }
  return items;
}

}  // namespace

json FilterDecision::to_json() const {
  return json{{"record_id", record_id},
              {"stage", stage},
              {"kept", kept},
              {"parked", parked},
              {"reasons", reasons}};
}

double RetentionReport::retention(size_t out, size_t in) {
  if (in == 0) return 0.0;
  return 100.0 * static_cast<double>(out) / static_cast<double>(in);
}

double RetentionReport::stage1_retention() const { return retention(stage1_kept, input_count); }
double RetentionReport::stage2_retention() const { return retention(stage2_kept, stage1_kept); }
double RetentionReport::stage3_retention() const { return retention(stage3_kept, stage2_kept); }
double RetentionReport::overall_retention() const { return retention(stage3_kept, input_count); }

json RetentionReport::to_json() const {
  return json{{"input_count", input_count},
              {"stage1_kept", stage1_kept},
              {"stage2_kept", stage2_kept},
              {"stage3_kept", stage3_kept},
              {"parked", parked},
              {"stage1_retention_pct", stage1_retention()},
              {"stage2_retention_pct", stage2_retention()},
              {"stage3_retention_pct", stage3_retention()},
              {"overall_retention_pct", overall_retention()}};
}

json CorpusStats::to_json() const {
  return json{{"example_count", example_count},
              {"total_tool_calls", total_tool_calls},
              {"per_tool_calls", per_tool_calls},
              {"per_relation_counts", per_relation_counts},
              {"total_provenance_records", total_provenance_records},
              {"total_sentences", total_sentences},
              {"avg_records_per_example", avg_records_per_example},
              {"avg_records_per_sentence", avg_records_per_sentence},
              {"avg_query_length", avg_query_length},
              {"avg_response_length", avg_response_length},
              {"empty_corpus", empty_corpus}};
}

FilterDecision stage1(const Record& record, const PipelineConfig& config) {
  FilterDecision d;
  d.record_id = record.instance.id;
  d.stage = 1;
  if (!eval_answer(record.solution.response, record.instance.gold_answer,
                   config.match_mode)) {
    d.reasons.push_back("answer-mismatch");
  }
  SchemaResult schema = check_schema(record.solution);
  for (const auto& f : schema.faults) d.reasons.push_back(f);
  d.kept = d.reasons.empty();
  return d;
}

std::vector<ToolTurn> mask_evidence(const std::vector<ToolTurn>& trajectory,
                                    const ProvenanceItem& item, MaskMode mode) {
  std::vector<ToolTurn> masked = trajectory;
  bool resolved = false;
  for (auto& turn : masked) {
    if (turn.turn_id != item.tool_id) continue;
    resolved = true;
    if (mode == MaskMode::Turn) {
      turn.observation = kMaskToken;
    } else {
      turn.observation = replace_all(turn.observation, item.source_text, kMaskToken);
    }
  }
  if (!resolved) throw std::runtime_error("unresolvable-item: " + item.tool_id);
  return masked;
}

FilterDecision stage2(const Record& record, const Regenerator& regenerator,
                      const PipelineConfig& config, Record* pruned_out) {
  FilterDecision d;
  d.record_id = record.instance.id;
  d.stage = 2;

  auto items = maskable_items(record);
  if (items.empty()) {
    d.kept = false;
    d.reasons.push_back("no-resolvable-evidence");
    return d;
  }
  std::vector<const ProvenanceItem*> sensitive_items;
  try {
    for (const ProvenanceItem* item : items) {
      auto masked = mask_evidence(record.trajectory, *item, config.mask_mode);
      Solution regenerated = regenerator(record.instance, masked);
      if (!solutions_equivalent(record.solution, regenerated, record.instance.gold_answer,
                                config.match_mode)) {
        sensitive_items.push_back(item);
        if (config.drop_rule == DropRule::PerRecord) break;
      }
    }
  } catch (const std::exception& e) {
    d.parked = true;
    d.reasons.push_back(std::string("regenerator-failure: ") + e.what());
    return d;
  }
  d.kept = !sensitive_items.empty();
  if (!d.kept) {
    d.reasons.push_back("evidence-insensitive");
    return d;
  }
  if (config.drop_rule == DropRule::PerCitation && pruned_out) {
    Record pruned = record;
    for (auto& sentence : pruned.solution.sentences) {
      auto& prov = sentence.provenance;
      auto is_sensitive = [&](const ProvenanceItem& p) {
        for (const ProvenanceItem* s : sensitive_items) {
          if (s->tool_id == p.tool_id && s->source_text == p.source_text &&
              s->relation == p.relation) {
            return true;
          }
        }
        return false;
      };
      size_t sensitive_count =
          static_cast<size_t>(std::count_if(prov.begin(), prov.end(), is_sensitive));
      if (sensitive_count == 0 || sensitive_count == prov.size()) continue;
      prov.erase(std::remove_if(prov.begin(), prov.end(),
                                [&](const ProvenanceItem& p) { return !is_sensitive(p); }),
                 prov.end());
    }
    *pruned_out = std::move(pruned);
  }
  return d;
}

FilterDecision stage3(const Record& record, RecordJudge& judge) {
  FilterDecision d;
  d.record_id = record.instance.id;
  d.stage = 3;
  try {
    JudgeVerdict verdict = judge.judge_record(record);
    d.kept = verdict.overall_correct;
    if (!d.kept) d.reasons = verdict.error_details;
  } catch (const JudgeError&) {
    d.parked = true;
    d.reasons.push_back(fault::kJudgeUnavailable);
  }
  return d;
}

PipelineResult run_pipeline(const std::vector<Record>& corpus, const PipelineConfig& config,
                            const Regenerator& regenerator, RecordJudge& judge) {
  PipelineResult result;
  result.report.input_count = corpus.size();

  std::vector<const Record*> survivors;
  for (const auto& record : corpus) {
    FilterDecision d = stage1(record, config);
    result.decisions.push_back(d);
    if (d.kept) survivors.push_back(&record);
  }
  result.report.stage1_kept = survivors.size();

  std::vector<Record> stage2_survivors;
  for (const Record* record : survivors) {
    Record pruned;
    FilterDecision d = stage2(*record, regenerator, config, &pruned);
    result.decisions.push_back(d);
    if (d.parked) {
      result.parked.push_back(*record);
      ++result.report.parked;
    } else if (d.kept) {
      stage2_survivors.push_back(config.drop_rule == DropRule::PerCitation &&
                                         !pruned.instance.id.empty()
                                     ? std::move(pruned)
                                     : *record);
    }
  }
  result.report.stage2_kept = stage2_survivors.size();

  for (const Record& rec : stage2_survivors) {
    const Record* record = &rec;
    FilterDecision d = stage3(*record, judge);
    result.decisions.push_back(d);
    if (d.parked) {
      result.parked.push_back(*record);
      ++result.report.parked;
    } else if (d.kept) {
      result.kept.push_back(*record);
    }
  }
  result.report.stage3_kept = result.kept.size();
  return result;
}

CorpusStats compute_stats(const std::vector<Record>& corpus) {
  CorpusStats stats;
  stats.example_count = corpus.size();
  if (corpus.empty()) {
    stats.empty_corpus = true;
    return stats;
  }
  size_t query_tokens = 0;
  size_t response_tokens = 0;
  for (const auto& record : corpus) {
    stats.total_tool_calls += record.trajectory.size();
    for (const auto& turn : record.trajectory) {
      ++stats.per_tool_calls[turn.tool == Tool::Unknown ? "Unknown" : turn.name];
    }
    stats.total_sentences += record.solution.sentences.size();
    for (const auto& s : record.solution.sentences) {
      stats.total_provenance_records += s.provenance.size();
      for (const auto& p : s.provenance) {
        ++stats.per_relation_counts[p.relation ? std::string(relation_name(*p.relation))
                                               : p.relation_raw];
      }
    }
    query_tokens += text::tokenize(record.instance.question).size();
    response_tokens += text::tokenize(record.solution.response).size();
  }
  const double n = static_cast<double>(stats.example_count);
  stats.avg_records_per_example = static_cast<double>(stats.total_provenance_records) / n;
  stats.avg_records_per_sentence =
      stats.total_sentences == 0
          ? 0.0
          : static_cast<double>(stats.total_provenance_records) /
                static_cast<double>(stats.total_sentences);
  stats.avg_query_length = static_cast<double>(query_tokens) / n;
  stats.avg_response_length = static_cast<double>(response_tokens) / n;
  return stats;
}

bool solutions_equivalent(const Solution& a, const Solution& b, const std::string& gold,
                          MatchMode mode) {
  if (eval_answer(a.response, gold, mode) != eval_answer(b.response, gold, mode)) {
    return false;
  }
  if (a.sentences.size() != b.sentences.size()) return false;
  for (size_t i = 0; i < a.sentences.size(); ++i) {
    const auto& sa = a.sentences[i];
    const auto& sb = b.sentences[i];
    if (sa.sentence_id != sb.sentence_id) return false;
    if (sa.provenance.size() != sb.provenance.size()) return false;
    for (size_t j = 0; j < sa.provenance.size(); ++j) {
      const auto& pa = sa.provenance[j];
      const auto& pb = sb.provenance[j];
      if (pa.tool_id != pb.tool_id) return false;
      if (pa.relation != pb.relation) return false;
      if (text::normalize_ws(pa.source_text) != text::normalize_ws(pb.source_text)) {
        return false;
      }
    }
  }
  return true;
}

Regenerator identity_regenerator(const Record& record) {
  Solution original = record.solution;
  return [original](const Instance&, const std::vector<ToolTurn>&) { return original; };
}

Regenerator always_sensitive_regenerator(const Record& record) {
  Solution original = record.solution;
  return [original](const Instance&, const std::vector<ToolTurn>& trajectory) {
    bool masked = std::any_of(trajectory.begin(), trajectory.end(), [](const ToolTurn& t) {
      return t.observation.find(kMaskToken) != std::string::npos;
    });
    if (!masked) return original;
    Solution changed = original;
    changed.response = "unable to determine";
    for (auto& s : changed.sentences) s.text = "unable to determine";
    return changed;
  };
}

}  // namespace tracer
