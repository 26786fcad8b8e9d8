#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "tracer/config.hpp"

using namespace tracer;

TEST_CASE("defaults are the published training values") {
  Config c;
  CHECK(c.weights.w0 == 1.0);
  CHECK(c.weights.w_cite == 0.5);
  CHECK(c.grpo.lambda == 0.3);
  CHECK(c.grpo.epsilon == 0.2);
  CHECK(c.grpo.beta == 0.02);
  CHECK(c.grpo.norm_domain == NormDomain::PooledTokens);
  CHECK(c.match_mode == MatchMode::Containment);
  CHECK(c.turn_id_mode == TurnIdMode::PerTool);
  CHECK(c.rule_judge.quotation_token_containment == 0.9);
  CHECK(c.rule_judge.compression_recall == 0.7);
  CHECK(c.rule_judge.inference_recall == 0.3);
  CHECK(c.verify.ws_tolerant_source == false);
  CHECK(c.mask_mode == MaskMode::Span);
  CHECK(c.drop_rule == DropRule::PerRecord);
  CHECK(c.metrics.link_match == LinkMatchMode::Containment);
  CHECK(c.metrics.averaging == AveragingMode::Micro);
  CHECK(c.strict_relations);
  CHECK(c.judge_endpoint.empty());
  CHECK(c.judge_model == "rule");
  CHECK(c.jobs == 1);
}

TEST_CASE("json round trip preserves every knob") {
  Config c;
  c.weights.w_cite = 0.25;
  c.grpo.lambda = 0.7;
  c.grpo.norm_domain = NormDomain::ScalarReward;
  c.match_mode = MatchMode::Exact;
  c.turn_id_mode = TurnIdMode::Global;
  c.rule_judge.inference_recall = 0.5;
  c.verify.ws_tolerant_source = true;
  c.mask_mode = MaskMode::Turn;
  c.drop_rule = DropRule::PerCitation;
  c.metrics.link_match = LinkMatchMode::Exact;
  c.metrics.averaging = AveragingMode::Macro;
  c.strict_relations = false;
  c.judge_endpoint = "http://localhost:9/v1/chat/completions";
  c.judge_model = "gpt-test";
  c.judge_cache_dir = "/tmp/cache";
  c.jobs = 8;
  Config back = Config::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
}

TEST_CASE("partial json overlays onto defaults and unknown keys are ignored") {
  json j = {{"lambda", 0.9}, {"mask_mode", "turn"}, {"not_a_real_key", 123}};
  Config c = Config::from_json(j);
  CHECK(c.grpo.lambda == 0.9);
  CHECK(c.mask_mode == MaskMode::Turn);
  CHECK(c.grpo.epsilon == 0.2);  // untouched
  CHECK(c.weights.w_cite == 0.5);
}

TEST_CASE("enum name helpers") {
  CHECK(match_mode_name(MatchMode::Exact) == "exact");
  CHECK(match_mode_name(MatchMode::Containment) == "containment");
  CHECK(turn_id_mode_name(TurnIdMode::Global) == "global");
  CHECK(turn_id_mode_name(TurnIdMode::PerTool) == "per-tool");
  CHECK(mask_mode_name(MaskMode::Turn) == "turn");
  CHECK(mask_mode_name(MaskMode::Span) == "span");
  CHECK(drop_rule_name(DropRule::PerCitation) == "per-citation");
  CHECK(drop_rule_name(DropRule::PerRecord) == "per-record");
  CHECK(link_match_mode_name(LinkMatchMode::Exact) == "exact");
  CHECK(averaging_mode_name(AveragingMode::Macro) == "macro");
  CHECK(norm_domain_name(NormDomain::ScalarReward) == "scalar-reward");
  CHECK(norm_domain_name(NormDomain::PooledTokens) == "pooled-tokens");
}

TEST_CASE("config file loading") {
  auto path = std::filesystem::temp_directory_path() / "tracer-config-test.json";
  {
    std::ofstream out(path);
    out << R"({"epsilon": 0.1, "judge_model": "remote-a"})";
  }
  Config c = Config::from_file(path.string());
  CHECK(c.grpo.epsilon == 0.1);
  CHECK(c.judge_model == "remote-a");
  CHECK_THROWS(Config::from_file("/nonexistent/config.json"));

  // A non-object file is rejected, not silently defaulted.
  {
    std::ofstream out(path);
    out << "[1, 2, 3]";
  }
  CHECK_THROWS(Config::from_file(path.string()));
  std::filesystem::remove(path);
}

TEST_CASE("environment layer") {
  auto path = std::filesystem::temp_directory_path() / "tracer-env-config-test.json";
  {
    std::ofstream out(path);
    out << R"({"beta": 0.05})";
  }
  setenv("TRACER_CONFIG", path.c_str(), 1);
  Config c = Config::from_environment();
  CHECK(c.grpo.beta == 0.05);
  unsetenv("TRACER_CONFIG");
  Config d = Config::from_environment();
  CHECK(d.grpo.beta == 0.02);
  std::filesystem::remove(path);
}
