#include "tracer/metrics.hpp"

#include <algorithm>
#include <map>

#include "tracer/reward.hpp"
#include "tracer/text.hpp"

namespace tracer {

json MetricsReport::to_json() const {
  json j;
  j["accuracy_pct"] = accuracy_pct;
  if (has_summ) j["summ_accuracy_pct"] = summ_accuracy_pct;
  j["traceability_pct"] = traceability_pct;
  j["prov_precision_pct"] = prov_precision_pct;
  j["prov_recall_pct"] = prov_recall_pct;
  j["prov_f1_pct"] = prov_f1_pct;
  j["total_tool_calls"] = total_tool_calls;
  j["total_tool_errors"] = total_tool_errors;
  return j;
}

double accuracy(const std::vector<int>& evals) {
  if (evals.empty()) throw MetricsError("empty-input");
  long sum = 0;
  for (int e : evals) sum += e;
  return 100.0 * static_cast<double>(sum) / static_cast<double>(evals.size());
}

double traceability(const std::vector<VerificationReport>& reports) {
  if (reports.empty()) throw MetricsError("empty-input");
  size_t traceable = 0;
  for (const auto& r : reports) {
    if (r.r_trace == 1) ++traceable;
  }
  return 100.0 * static_cast<double>(traceable) / static_cast<double>(reports.size());
}

double traceability(const std::vector<JudgeVerdict>& verdicts) {
  if (verdicts.empty()) throw MetricsError("empty-input");
  size_t traceable = 0;
  for (const auto& v : verdicts) {
    if (v.overall_correct) ++traceable;
  }
  return 100.0 * static_cast<double>(traceable) / static_cast<double>(verdicts.size());
}

std::vector<ProvLink> extract_links(const Record& record) {
  std::vector<ProvLink> links;
  for (const auto& s : record.solution.sentences) {
    for (const auto& p : s.provenance) {
      if (!p.relation) continue;  // unlabeled links cannot match anything
      links.push_back(
          {p.tool_id, *p.relation, text::normalize_loose(p.source_text)});
    }
  }
  return links;
}

bool links_match(const ProvLink& pred, const ProvLink& ref, LinkMatchMode mode) {
  if (pred.tool_id != ref.tool_id || pred.relation != ref.relation) return false;
  if (pred.source_key == ref.source_key) return true;
  if (mode == LinkMatchMode::Exact) return false;
  return text::contains(pred.source_key, ref.source_key) ||
         text::contains(ref.source_key, pred.source_key);
}

size_t greedy_match(const std::vector<ProvLink>& pred, const std::vector<ProvLink>& ref,
                    LinkMatchMode mode) {
  std::vector<bool> used(ref.size(), false);
  size_t matched = 0;
  for (const auto& p : pred) {
    for (size_t i = 0; i < ref.size(); ++i) {
      if (used[i]) continue;
      if (links_match(p, ref[i], mode)) {
        used[i] = true;
        ++matched;
        break;
      }
    }
  }
  return matched;
}

PrfResult prov_prf(const std::vector<std::vector<ProvLink>>& pred_per_example,
                   const std::vector<std::vector<ProvLink>>& ref_per_example,
                   const MetricsOptions& opts) {
  if (pred_per_example.size() != ref_per_example.size()) {
    throw MetricsError("pred/ref example counts differ");
  }
  PrfResult res;
  double macro_p = 0.0;
  double macro_r = 0.0;
  for (size_t i = 0; i < pred_per_example.size(); ++i) {
    const auto& pred = pred_per_example[i];
    const auto& ref = ref_per_example[i];
    const size_t matched = greedy_match(pred, ref, opts.link_match);
    res.matched += matched;
    res.pred_links += pred.size();
    res.ref_links += ref.size();
    macro_p += pred.empty() ? 0.0 : static_cast<double>(matched) / pred.size();
    macro_r += ref.empty() ? 0.0 : static_cast<double>(matched) / ref.size();
  }
  if (res.pred_links == 0 || res.ref_links == 0) res.empty_side = true;

  if (opts.averaging == AveragingMode::Macro) {
    const double n = static_cast<double>(pred_per_example.size());
    res.precision_pct = n == 0 ? 0.0 : 100.0 * macro_p / n;
    res.recall_pct = n == 0 ? 0.0 : 100.0 * macro_r / n;
  } else {
    res.precision_pct =
        res.pred_links == 0
            ? 0.0
            : 100.0 * static_cast<double>(res.matched) / static_cast<double>(res.pred_links);
    res.recall_pct =
        res.ref_links == 0
            ? 0.0
            : 100.0 * static_cast<double>(res.matched) / static_cast<double>(res.ref_links);
  }
  res.f1_pct = f1_from_pr(res.precision_pct, res.recall_pct);
  return res;
}

double f1_from_pr(double precision_pct, double recall_pct) {
  if (precision_pct <= 0.0 && recall_pct <= 0.0) return 0.0;
  return 2.0 * precision_pct * recall_pct / (precision_pct + recall_pct);
}

ToolStats tool_stats(const std::vector<std::vector<ToolTurn>>& trajectories) {
  ToolStats stats;
  for (const auto& traj : trajectories) {
    stats.total_calls += traj.size();
    for (const auto& turn : traj) {
      if (turn.error_flag || turn.tool == Tool::Unknown || turn.observation.empty()) {
        ++stats.total_errors;
      }
    }
  }
  return stats;
}

MetricsReport full_report(const std::vector<Record>& pred, const std::vector<Record>& ref,
                          const std::vector<VerificationReport>& reports,
                          const std::vector<std::pair<std::string, int>>& summ_evals,
                          const MetricsOptions& opts) {
  std::map<std::string, const Record*> ref_by_id;
  for (const auto& r : ref) ref_by_id[r.instance.id] = &r;
  if (ref_by_id.size() != ref.size()) throw MetricsError("duplicate ids in reference corpus");
  if (pred.size() != ref.size()) {
    for (const auto& r : ref) {
      bool found = std::any_of(pred.begin(), pred.end(), [&](const Record& p) {
        return p.instance.id == r.instance.id;
      });
      if (!found) throw MetricsError("id-mismatch: missing prediction for " + r.instance.id);
    }
    throw MetricsError("id-mismatch: corpus sizes differ");
  }
  if (reports.size() != pred.size()) {
    throw MetricsError("id-mismatch: report count differs from prediction count");
  }

  MetricsReport report;
  std::vector<int> evals;
  std::vector<std::vector<ProvLink>> pred_links;
  std::vector<std::vector<ProvLink>> ref_links;
  std::vector<std::vector<ToolTurn>> trajectories;
  for (const auto& p : pred) {
    auto it = ref_by_id.find(p.instance.id);
    if (it == ref_by_id.end()) {
      throw MetricsError("id-mismatch: no reference for " + p.instance.id);
    }
    const Record& r = *it->second;
    evals.push_back(eval_answer(p.solution.response, r.instance.gold_answer));
    pred_links.push_back(extract_links(p));
    ref_links.push_back(extract_links(r));
    trajectories.push_back(p.trajectory);
  }
  report.accuracy_pct = accuracy(evals);
  report.traceability_pct = traceability(reports);
  PrfResult prf = prov_prf(pred_links, ref_links, opts);
  report.prov_precision_pct = prf.precision_pct;
  report.prov_recall_pct = prf.recall_pct;
  report.prov_f1_pct = prf.f1_pct;
  ToolStats ts = tool_stats(trajectories);
  report.total_tool_calls = ts.total_calls;
  report.total_tool_errors = ts.total_errors;

  if (!summ_evals.empty()) {
    std::vector<int> summ;
    for (const auto& [id, correct] : summ_evals) summ.push_back(correct);
    report.summ_accuracy_pct = accuracy(summ);
    report.has_summ = true;
  }
  return report;
}

}  // namespace tracer
