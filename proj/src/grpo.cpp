#include "tracer/grpo.hpp"

#include <cmath>

namespace tracer {

namespace {

double pairwise_sum_range(const double* data, size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  size_t half = n / 2;
  return pairwise_sum_range(data, half) + pairwise_sum_range(data + half, n - half);
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw GrpoError(std::string("non-finite ") + what);
}

}  // namespace

double pairwise_sum(const std::vector<double>& values) {
  return pairwise_sum_range(values.data(), values.size());
}

void validate_rollout(const Rollout& rollout) {
  const size_t n = rollout.logp_old.size();
  if (n == 0) throw GrpoError("empty rollout");
  if (rollout.logp_new.size() != n || rollout.logp_ref.size() != n) {
    throw GrpoError("log-probability arrays disagree on length");
  }
  for (size_t i = 0; i < n; ++i) {
    require_finite(rollout.logp_old[i], "logp_old");
    require_finite(rollout.logp_new[i], "logp_new");
    require_finite(rollout.logp_ref[i], "logp_ref");
  }
  for (size_t i = 0; i < rollout.tool_spans.size(); ++i) {
    const ToolSpan& s = rollout.tool_spans[i];
    if (s.start < 0 || s.end < s.start || s.end > static_cast<int>(n)) {
      throw GrpoError("tool span out of range for " + s.turn_id);
    }
    for (size_t j = 0; j < i; ++j) {
      const ToolSpan& o = rollout.tool_spans[j];
      if (s.start < o.end && o.start < s.end) {
        throw GrpoError("overlapping tool spans " + o.turn_id + " and " + s.turn_id);
      }
    }
  }
}

std::vector<double> token_raw_scores(const Rollout& rollout, double lambda) {
  std::vector<double> raw(rollout.size(), rollout.reward.r_total);
  for (const auto& span : rollout.tool_spans) {
    auto it = rollout.reward.credits.find(span.turn_id);
    if (it == rollout.reward.credits.end()) continue;
    for (int n = span.start; n < span.end; ++n) {
      raw[static_cast<size_t>(n)] += lambda * it->second;
    }
  }
  return raw;
}

std::vector<std::vector<double>> group_advantages(const RolloutGroup& group,
                                                  const GrpoConfig& config) {
  if (group.rollouts.size() < 2) throw GrpoError("group-size-too-small");
  for (const auto& r : group.rollouts) validate_rollout(r);

  if (config.norm_domain == NormDomain::ScalarReward) {
    // Normalize scalar rewards only; the credit bonus is added afterwards.
    std::vector<double> rewards;
    for (const auto& r : group.rollouts) rewards.push_back(r.reward.r_total);
    const double mu = pairwise_sum(rewards) / static_cast<double>(rewards.size());
    std::vector<double> sq;
    for (double r : rewards) sq.push_back((r - mu) * (r - mu));
    const double sigma = std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()));
    std::vector<std::vector<double>> advantages;
    for (const auto& r : group.rollouts) {
      const double base = (r.reward.r_total - mu) / (sigma + config.norm_delta);
      std::vector<double> adv(r.size(), base);
      for (const auto& span : r.tool_spans) {
        auto it = r.reward.credits.find(span.turn_id);
        if (it == r.reward.credits.end()) continue;
        for (int n = span.start; n < span.end; ++n) {
          adv[static_cast<size_t>(n)] += config.lambda * it->second;
        }
      }
      advantages.push_back(std::move(adv));
    }
    return advantages;
  }

  std::vector<std::vector<double>> raw;
  std::vector<double> pooled;
  for (const auto& r : group.rollouts) {
    raw.push_back(token_raw_scores(r, config.lambda));
    pooled.insert(pooled.end(), raw.back().begin(), raw.back().end());
  }
  const double mu = pairwise_sum(pooled) / static_cast<double>(pooled.size());
  std::vector<double> sq(pooled.size());
  for (size_t i = 0; i < pooled.size(); ++i) sq[i] = (pooled[i] - mu) * (pooled[i] - mu);
  const double sigma = std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()));

  std::vector<std::vector<double>> advantages;
  for (auto& scores : raw) {
    for (double& s : scores) s = (s - mu) / (sigma + config.norm_delta);
    advantages.push_back(std::move(scores));
  }
  return advantages;
}

double prob_ratio(double logp_new, double logp_old) {
  require_finite(logp_new, "logp_new");
  require_finite(logp_old, "logp_old");
  return std::exp(logp_new - logp_old);
}

double clipped_token_loss(double rho, double advantage, double kl,
                          const GrpoConfig& config) {
  const double clipped =
      std::min(std::max(rho, 1.0 - config.epsilon), 1.0 + config.epsilon);
  return std::min(rho * advantage, clipped * advantage) - config.beta * kl;
}

double kl_estimate(double logp_new, double logp_ref) {
  require_finite(logp_new, "logp_new");
  require_finite(logp_ref, "logp_ref");
  const double delta = logp_ref - logp_new;
  return std::exp(delta) - delta - 1.0;
}

double objective(const RolloutGroup& group, const GrpoConfig& config) {
  const auto advantages = group_advantages(group, config);
  std::vector<double> per_rollout;
  for (size_t g = 0; g < group.rollouts.size(); ++g) {
    const Rollout& r = group.rollouts[g];
    std::vector<double> losses(r.size());
    for (size_t n = 0; n < r.size(); ++n) {
      const double rho = prob_ratio(r.logp_new[n], r.logp_old[n]);
      const double kl = kl_estimate(r.logp_new[n], r.logp_ref[n]);
      losses[n] = clipped_token_loss(rho, advantages[g][n], kl, config);
    }
    per_rollout.push_back(pairwise_sum(losses) / static_cast<double>(r.size()));
  }
  return pairwise_sum(per_rollout) / static_cast<double>(per_rollout.size());
}

RolloutGroup parse_group(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ParseError(ParseError::Kind::MalformedSyntax, "$");
  }
  RolloutGroup group;
  group.group_id = j.value("group_id", "");
  for (const auto& rj : j.value("rollouts", json::array())) {
    Rollout r;
    r.logp_old = rj.at("logp_old").get<std::vector<double>>();
    r.logp_new = rj.at("logp_new").get<std::vector<double>>();
    r.logp_ref = rj.at("logp_ref").get<std::vector<double>>();
    for (const auto& sj : rj.value("tool_spans", json::array())) {
      r.tool_spans.push_back({sj.at("turn_id").get<std::string>(),
                              sj.at("start").get<int>(), sj.at("end").get<int>()});
    }
    r.reward = RewardBreakdown::from_json(rj.at("reward"));
    group.rollouts.push_back(std::move(r));
  }
  return group;
}

json group_result_json(const RolloutGroup& group, const GrpoConfig& config) {
  const auto advantages = group_advantages(group, config);
  json j;
  j["group_id"] = group.group_id;
  j["advantages"] = advantages;
  j["objective"] = objective(group, config);
  return j;
}

}  // namespace tracer
