#pragma once

#include <optional>
#include <string>

#include "tracer/grpo.hpp"
#include "tracer/judge.hpp"
#include "tracer/metrics.hpp"
#include "tracer/model.hpp"
#include "tracer/pipeline.hpp"
#include "tracer/reward.hpp"

namespace tracer {

// The full knob surface. Defaults are the published training values where
// those exist; everything else is documented toolkit policy.
struct Config {
  RewardWeights weights;
  GrpoConfig grpo;
  MatchMode match_mode = MatchMode::Containment;
  TurnIdMode turn_id_mode = TurnIdMode::PerTool;
  RuleJudgeThresholds rule_judge;
  VerifyOptions verify;
  MaskMode mask_mode = MaskMode::Span;
  DropRule drop_rule = DropRule::PerRecord;
  MetricsOptions metrics;
  bool strict_relations = true;

  // Remote judge; unset endpoint means the rule judge is used.
  std::string judge_endpoint;
  std::string judge_model = "rule";
  std::string judge_cache_dir;
  int judge_concurrency = 4;

  int jobs = 1;

  // Flag beats file beats default; this parses the file/env layer.
  static Config from_json(const json& j);
  static Config from_file(const std::string& path);
  // Applies TRACER_CONFIG and TRACER_JUDGE_API_KEY when present.
  static Config from_environment();

  json to_json() const;
};

std::string_view match_mode_name(MatchMode m);
std::string_view turn_id_mode_name(TurnIdMode m);
std::string_view mask_mode_name(MaskMode m);
std::string_view drop_rule_name(DropRule d);
std::string_view link_match_mode_name(LinkMatchMode m);
std::string_view averaging_mode_name(AveragingMode m);
std::string_view norm_domain_name(NormDomain d);

}  // namespace tracer
