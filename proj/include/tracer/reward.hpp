#pragma once

#include <map>
#include <set>
#include <string>

#include "tracer/model.hpp"
#include "tracer/verify.hpp"

namespace tracer {

enum class MatchMode { Containment, Exact };

struct RewardWeights {
  double w0 = 1.0;
  double w_cite = 0.5;
};

struct RewardBreakdown {
  int r_vqa = 0;
  double r_cite = 0.0;
  int r_trace = 0;
  double r_total = 0.0;
  std::map<std::string, int> credits;  // turn_id -> c_t
  std::set<std::string> called_turns;
  std::set<std::string> cited_valid_turns;

  json to_json() const;
  static RewardBreakdown from_json(const json& j);
};

// 1 iff the response matches the gold answer under the selected mode.
int eval_answer(const std::string& response, const std::string& gold,
                MatchMode mode = MatchMode::Containment);

struct CiteResult {
  double r_cite = 0.0;
  std::set<std::string> cited_valid_turns;
};

CiteResult cite_reward(const VerificationReport& report, const Record& record);

double total_reward(int r_vqa, int r_trace, double r_cite, const RewardWeights& weights);

std::map<std::string, int> local_credit(const Record& record,
                                        const VerificationReport& report, int r_vqa,
                                        int r_trace);

RewardBreakdown score_record(const Record& record, const VerificationReport& report,
                             const RewardWeights& weights = {},
                             MatchMode mode = MatchMode::Containment);

}  // namespace tracer
