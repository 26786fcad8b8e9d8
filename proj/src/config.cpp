#include "tracer/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tracer {

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

void read_enum(const json& j, const char* key, MatchMode& out) {
  std::string v;
  read(j, key, v);
  if (v == "exact") out = MatchMode::Exact;
  if (v == "containment") out = MatchMode::Containment;
}

}  // namespace

std::string_view match_mode_name(MatchMode m) {
  return m == MatchMode::Exact ? "exact" : "containment";
}
std::string_view turn_id_mode_name(TurnIdMode m) {
  return m == TurnIdMode::Global ? "global" : "per-tool";
}
std::string_view mask_mode_name(MaskMode m) { return m == MaskMode::Turn ? "turn" : "span"; }
std::string_view drop_rule_name(DropRule d) {
  return d == DropRule::PerCitation ? "per-citation" : "per-record";
}
std::string_view link_match_mode_name(LinkMatchMode m) {
  return m == LinkMatchMode::Exact ? "exact" : "containment";
}
std::string_view averaging_mode_name(AveragingMode m) {
  return m == AveragingMode::Macro ? "macro" : "micro";
}
std::string_view norm_domain_name(NormDomain d) {
  return d == NormDomain::ScalarReward ? "scalar-reward" : "pooled-tokens";
}

Config Config::from_json(const json& j) {
  Config c;
  read(j, "w0", c.weights.w0);
  read(j, "w_cite", c.weights.w_cite);
  read(j, "lambda", c.grpo.lambda);
  read(j, "epsilon", c.grpo.epsilon);
  read(j, "beta", c.grpo.beta);
  read(j, "norm_delta", c.grpo.norm_delta);
  read_enum(j, "match_mode", c.match_mode);
  std::string s;
  read(j, "norm_domain", s);
  if (s == "scalar-reward") c.grpo.norm_domain = NormDomain::ScalarReward;
  s.clear();
  read(j, "turn_id_mode", s);
  if (s == "global") c.turn_id_mode = TurnIdMode::Global;
  read(j, "quotation_token_containment", c.rule_judge.quotation_token_containment);
  read(j, "compression_recall", c.rule_judge.compression_recall);
  read(j, "inference_recall", c.rule_judge.inference_recall);
  read(j, "ws_tolerant_source", c.verify.ws_tolerant_source);
  s.clear();
  read(j, "mask_mode", s);
  if (s == "turn") c.mask_mode = MaskMode::Turn;
  s.clear();
  read(j, "drop_rule", s);
  if (s == "per-citation") c.drop_rule = DropRule::PerCitation;
  s.clear();
  read(j, "link_match", s);
  if (s == "exact") c.metrics.link_match = LinkMatchMode::Exact;
  s.clear();
  read(j, "averaging", s);
  if (s == "macro") c.metrics.averaging = AveragingMode::Macro;
  read(j, "strict_relations", c.strict_relations);
  read(j, "judge_endpoint", c.judge_endpoint);
  read(j, "judge_model", c.judge_model);
  read(j, "judge_cache_dir", c.judge_cache_dir);
  read(j, "judge_concurrency", c.judge_concurrency);
  read(j, "jobs", c.jobs);
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw std::runtime_error("config file is not a JSON object: " + path);
  }
  return from_json(j);
}

Config Config::from_environment() {
  if (const char* path = std::getenv("TRACER_CONFIG")) {
    return from_file(path);
  }
  return Config{};
}

json Config::to_json() const {
  return json{{"w0", weights.w0},
              {"w_cite", weights.w_cite},
              {"lambda", grpo.lambda},
              {"epsilon", grpo.epsilon},
              {"beta", grpo.beta},
              {"norm_delta", grpo.norm_delta},
              {"norm_domain", std::string(norm_domain_name(grpo.norm_domain))},
              {"match_mode", std::string(match_mode_name(match_mode))},
              {"turn_id_mode", std::string(turn_id_mode_name(turn_id_mode))},
              {"quotation_token_containment", rule_judge.quotation_token_containment},
              {"compression_recall", rule_judge.compression_recall},
              {"inference_recall", rule_judge.inference_recall},
              {"ws_tolerant_source", verify.ws_tolerant_source},
              {"mask_mode", std::string(mask_mode_name(mask_mode))},
              {"drop_rule", std::string(drop_rule_name(drop_rule))},
              {"link_match", std::string(link_match_mode_name(metrics.link_match))},
              {"averaging", std::string(averaging_mode_name(metrics.averaging))},
              {"strict_relations", strict_relations},
              {"judge_endpoint", judge_endpoint},
              {"judge_model", judge_model},
              {"judge_cache_dir", judge_cache_dir},
              {"judge_concurrency", judge_concurrency},
              {"jobs", jobs}};
}

}  // namespace tracer
