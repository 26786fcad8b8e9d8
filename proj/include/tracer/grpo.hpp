#pragma once

#include <string>
#include <vector>

#include "tracer/model.hpp"
#include "tracer/reward.hpp"

namespace tracer {

struct ToolSpan {
  std::string turn_id;
  int start = 0;  // half-open token range [start, end)
  int end = 0;
};

struct Rollout {
  std::vector<double> logp_old;
  std::vector<double> logp_new;
  std::vector<double> logp_ref;
  std::vector<ToolSpan> tool_spans;
  RewardBreakdown reward;

  size_t size() const { return logp_old.size(); }
};

struct RolloutGroup {
  std::string group_id;
  std::vector<Rollout> rollouts;
};

enum class NormDomain {
  PooledTokens,  // normalize all token raw scores across the group
  ScalarReward,  // normalize R_total only, add the credit bonus afterwards
};

struct GrpoConfig {
  double lambda = 0.3;
  double epsilon = 0.2;
  double beta = 0.02;
  double norm_delta = 1e-8;
  NormDomain norm_domain = NormDomain::PooledTokens;
};

class GrpoError : public std::runtime_error {
 public:
  explicit GrpoError(const std::string& what) : std::runtime_error(what) {}
};

// Validates array lengths, span bounds, span disjointness, finiteness.
void validate_rollout(const Rollout& rollout);

// raw_n = R_total + lambda * sum_t 1[n in S_t] * c_t
std::vector<double> token_raw_scores(const Rollout& rollout, double lambda);

// Group-normalized advantages, one array per rollout. Requires G >= 2.
std::vector<std::vector<double>> group_advantages(const RolloutGroup& group,
                                                  const GrpoConfig& config);

double prob_ratio(double logp_new, double logp_old);

double clipped_token_loss(double rho, double advantage, double kl, const GrpoConfig& config);

// Nonnegative single-sample KL estimator against the reference policy.
double kl_estimate(double logp_new, double logp_ref);

double objective(const RolloutGroup& group, const GrpoConfig& config);

RolloutGroup parse_group(const std::string& line);
json group_result_json(const RolloutGroup& group, const GrpoConfig& config);

// Index-ascending pairwise summation; deterministic reduction order.
double pairwise_sum(const std::vector<double>& values);

}  // namespace tracer
