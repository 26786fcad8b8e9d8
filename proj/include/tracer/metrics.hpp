#pragma once

#include <string>
#include <vector>

#include "tracer/judge.hpp"
#include "tracer/model.hpp"
#include "tracer/verify.hpp"

namespace tracer {

struct ProvLink {
  std::string tool_id;
  Relation relation = Relation::Quotation;
  std::string source_key;  // whitespace/case-normalized source text
};

enum class LinkMatchMode { Containment, Exact };
enum class AveragingMode { Micro, Macro };

struct MetricsOptions {
  LinkMatchMode link_match = LinkMatchMode::Containment;
  AveragingMode averaging = AveragingMode::Micro;
};

struct PrfResult {
  double precision_pct = 0.0;
  double recall_pct = 0.0;
  double f1_pct = 0.0;
  size_t matched = 0;
  size_t pred_links = 0;
  size_t ref_links = 0;
  bool empty_side = false;
};

struct MetricsReport {
  double accuracy_pct = 0.0;
  double summ_accuracy_pct = 0.0;
  bool has_summ = false;
  double traceability_pct = 0.0;
  double prov_precision_pct = 0.0;
  double prov_recall_pct = 0.0;
  double prov_f1_pct = 0.0;
  size_t total_tool_calls = 0;
  size_t total_tool_errors = 0;

  json to_json() const;
};

class MetricsError : public std::runtime_error {
 public:
  explicit MetricsError(const std::string& what) : std::runtime_error(what) {}
};

double accuracy(const std::vector<int>& evals);

double traceability(const std::vector<VerificationReport>& reports);
double traceability(const std::vector<JudgeVerdict>& verdicts);

std::vector<ProvLink> extract_links(const Record& record);

bool links_match(const ProvLink& pred, const ProvLink& ref, LinkMatchMode mode);

// Greedy one-to-one matching in document order: each pred link takes the
// first unmatched ref link it agrees with.
size_t greedy_match(const std::vector<ProvLink>& pred, const std::vector<ProvLink>& ref,
                    LinkMatchMode mode);

PrfResult prov_prf(const std::vector<std::vector<ProvLink>>& pred_per_example,
                   const std::vector<std::vector<ProvLink>>& ref_per_example,
                   const MetricsOptions& opts = {});

double f1_from_pr(double precision_pct, double recall_pct);

struct ToolStats {
  size_t total_calls = 0;
  size_t total_errors = 0;
};

// A turn counts as an error when it is flagged, names an unknown tool, or
// returned an empty observation.
ToolStats tool_stats(const std::vector<std::vector<ToolTurn>>& trajectories);

MetricsReport full_report(const std::vector<Record>& pred, const std::vector<Record>& ref,
                          const std::vector<VerificationReport>& reports,
                          const std::vector<std::pair<std::string, int>>& summ_evals = {},
                          const MetricsOptions& opts = {});

}  // namespace tracer
