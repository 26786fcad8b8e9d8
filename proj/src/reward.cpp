#include "tracer/reward.hpp"

#include <algorithm>

#include "tracer/text.hpp"

namespace tracer {

namespace {

// Looks up the item cited by a verdict. Verdicts are ordered by
// (sentence_id, item_index) over the record's provenance lists.
const ProvenanceItem* item_for(const Record& record, const ItemVerdict& verdict) {
  for (const auto& s : record.solution.sentences) {
    if (s.sentence_id != verdict.sentence_id) continue;
    if (verdict.item_index < static_cast<int>(s.provenance.size())) {
      return &s.provenance[verdict.item_index];
    }
  }
  return nullptr;
}

}  // namespace

json RewardBreakdown::to_json() const {
  json j;
  j["r_vqa"] = r_vqa;
  j["r_cite"] = r_cite;
  j["r_trace"] = r_trace;
  j["r_total"] = r_total;
  j["credits"] = credits;
  j["called_turns"] = called_turns;
  j["cited_valid_turns"] = cited_valid_turns;
  return j;
}

RewardBreakdown RewardBreakdown::from_json(const json& j) {
  RewardBreakdown b;
  b.r_vqa = j.at("r_vqa").get<int>();
  b.r_cite = j.at("r_cite").get<double>();
  b.r_trace = j.at("r_trace").get<int>();
  b.r_total = j.at("r_total").get<double>();
  if (auto it = j.find("credits"); it != j.end()) {
    b.credits = it->get<std::map<std::string, int>>();
  }
  if (auto it = j.find("called_turns"); it != j.end()) {
    for (const auto& t : *it) b.called_turns.insert(t.get<std::string>());
  }
  if (auto it = j.find("cited_valid_turns"); it != j.end()) {
    for (const auto& t : *it) b.cited_valid_turns.insert(t.get<std::string>());
  }
  return b;
}

int eval_answer(const std::string& response, const std::string& gold, MatchMode mode) {
  const std::string norm_response = text::normalize_answer(response);
  const std::string norm_gold = text::normalize_answer(gold);
  if (mode == MatchMode::Exact) return norm_response == norm_gold ? 1 : 0;
  return text::token_subsequence(text::tokenize(norm_gold), text::tokenize(norm_response))
             ? 1
             : 0;
}

CiteResult cite_reward(const VerificationReport& report, const Record& record) {
  CiteResult res;
  for (const auto& verdict : report.verdicts) {
    if (!verdict.v) continue;
    if (const ProvenanceItem* item = item_for(record, verdict)) {
      res.cited_valid_turns.insert(item->tool_id);
    }
  }
  const size_t called = record.trajectory.size();
  res.r_cite = static_cast<double>(res.cited_valid_turns.size()) /
               static_cast<double>(std::max<size_t>(called, 1));
  return res;
}

double total_reward(int r_vqa, int r_trace, double r_cite, const RewardWeights& weights) {
  return r_vqa * r_trace * (weights.w0 + weights.w_cite * r_cite);
}

std::map<std::string, int> local_credit(const Record& record,
                                        const VerificationReport& report, int r_vqa,
                                        int r_trace) {
  std::map<std::string, int> credits;
  for (const auto& turn : record.trajectory) {
    int cited_valid = 0;
    for (const auto& verdict : report.verdicts) {
      if (!verdict.v) continue;
      const ProvenanceItem* item = item_for(record, verdict);
      if (item && item->tool_id == turn.turn_id) ++cited_valid;
    }
    credits[turn.turn_id] = r_vqa * r_trace * std::min(1, cited_valid);
  }
  return credits;
}

RewardBreakdown score_record(const Record& record, const VerificationReport& report,
                             const RewardWeights& weights, MatchMode mode) {
  RewardBreakdown b;
  b.r_vqa = eval_answer(record.solution.response, record.instance.gold_answer, mode);
  b.r_trace = report.r_trace;
  CiteResult cite = cite_reward(report, record);
  b.r_cite = cite.r_cite;
  b.cited_valid_turns = std::move(cite.cited_valid_turns);
  for (const auto& turn : record.trajectory) b.called_turns.insert(turn.turn_id);
  b.r_total = total_reward(b.r_vqa, b.r_trace, b.r_cite, weights);
  b.credits = local_credit(record, report, b.r_vqa, b.r_trace);
  return b;
}

}  // namespace tracer
