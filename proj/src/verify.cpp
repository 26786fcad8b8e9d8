#include "tracer/verify.hpp"

#include "tracer/text.hpp"

namespace tracer {

json VerificationReport::to_json() const {
  json j;
  j["c_schema"] = c_schema;
  j["r_trace"] = r_trace;
  j["schema_faults"] = schema_faults;
  j["incomplete"] = incomplete;
  json verdicts_j = json::array();
  for (const auto& v : verdicts) {
    verdicts_j.push_back({{"sentence_id", v.sentence_id},
                          {"item_index", v.item_index},
                          {"v_turn", v.v_turn},
                          {"v_src", v.v_src},
                          {"v_rel", v.v_rel},
                          {"v", v.v},
                          {"reasons", v.reasons}});
  }
  j["verdicts"] = std::move(verdicts_j);
  return j;
}

VerificationReport VerificationReport::from_json(const json& j) {
  VerificationReport r;
  r.c_schema = j.at("c_schema").get<int>();
  r.r_trace = j.at("r_trace").get<int>();
  r.schema_faults = j.value("schema_faults", std::vector<std::string>{});
  r.incomplete = j.value("incomplete", false);
  for (const auto& vj : j.value("verdicts", json::array())) {
    ItemVerdict v;
    v.sentence_id = vj.at("sentence_id").get<int>();
    v.item_index = vj.at("item_index").get<int>();
    v.v_turn = vj.at("v_turn").get<int>();
    v.v_src = vj.at("v_src").get<int>();
    v.v_rel = vj.at("v_rel").get<int>();
    v.v = vj.at("v").get<int>();
    v.reasons = vj.value("reasons", std::vector<std::string>{});
    r.verdicts.push_back(std::move(v));
  }
  return r;
}

SchemaResult check_schema(const Solution& solution) {
  SchemaResult res;
  bool ids_ok = true;
  int expected = 1;
  for (const auto& s : solution.sentences) {
    if (s.sentence_id != expected++) {
      ids_ok = false;
    }
  }
  if (!ids_ok) {
    res.faults.push_back(fault::kGapInIds);
  }
  bool prov_ok = !solution.sentences.empty();
  bool rel_ok = true;
  for (const auto& s : solution.sentences) {
    if (s.provenance.empty()) prov_ok = false;
    for (const auto& p : s.provenance) {
      if (!p.relation) rel_ok = false;
    }
  }
  if (!prov_ok) res.faults.push_back(fault::kMissingProvenance);
  if (!rel_ok) res.faults.push_back(fault::kBadRelationLabel);

  std::string joined = text::normalize_ws(reconstruct_response(solution.sentences));
  if (joined != text::normalize_ws(solution.response)) {
    res.faults.push_back(fault::kReconstructionMismatch);
  }
  res.c_schema = res.faults.empty() ? 1 : 0;
  return res;
}

TurnResult check_turn(const ProvenanceItem& item, const std::vector<ToolTurn>& trajectory) {
  for (const auto& turn : trajectory) {
    if (turn.turn_id == item.tool_id) return {1, &turn};
  }
  return {0, nullptr};
}

int check_source(const ProvenanceItem& item, const ToolTurn& turn,
                 const VerifyOptions& opts) {
  if (item.source_text.empty()) return 0;
  if (opts.ws_tolerant_source) {
    return text::contains_ws_tolerant(turn.observation, item.source_text) ? 1 : 0;
  }
  return text::contains(turn.observation, item.source_text) ? 1 : 0;
}

int check_relation(const ProvenanceItem& item, const SentenceRecord& sentence,
                   RelationJudge& judge) {
  if (!item.relation) return 0;
  return judge.judge_relation(item.source_text, sentence.text, *item.relation);
}

VerificationReport verify(const Record& record, RelationJudge& judge,
                          const VerifyOptions& opts) {
  VerificationReport report;
  SchemaResult schema = check_schema(record.solution);
  report.c_schema = schema.c_schema;
  report.schema_faults = std::move(schema.faults);

  int product = 1;
  for (const auto& sentence : record.solution.sentences) {
    int item_index = 0;
    for (const auto& item : sentence.provenance) {
      ItemVerdict verdict;
      verdict.sentence_id = sentence.sentence_id;
      verdict.item_index = item_index++;

      TurnResult turn = check_turn(item, record.trajectory);
      verdict.v_turn = turn.v_turn;
      if (!turn.v_turn) {
        verdict.reasons.push_back(fault::kUnknownTurn);
      } else {
        verdict.v_src = check_source(item, *turn.turn, opts);
        if (!verdict.v_src) {
          verdict.reasons.push_back(item.source_text.empty() ? fault::kEmptySource
                                                             : fault::kSourceNotSubstring);
        } else {
          if (!item.relation) {
            verdict.reasons.push_back(fault::kBadRelationLabel);
          } else {
            try {
              verdict.v_rel = check_relation(item, sentence, judge);
              if (!verdict.v_rel) verdict.reasons.push_back(fault::kRelationRejected);
            } catch (const JudgeError&) {
              report.incomplete = true;
              verdict.reasons.push_back(fault::kJudgeUnavailable);
            }
          }
        }
      }
      verdict.v = verdict.v_turn * verdict.v_src * verdict.v_rel;
      product *= verdict.v;
      report.verdicts.push_back(std::move(verdict));
    }
  }
  report.r_trace = report.c_schema * product;
  return report;
}

}  // namespace tracer
