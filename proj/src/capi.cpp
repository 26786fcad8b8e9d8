#include "tracer.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "tracer/config.hpp"
#include "tracer/pipeline.hpp"
#include "tracer/synth.hpp"

using namespace tracer;

struct tracer_ctx {
  Config config;
  std::string last_error;
  std::unique_ptr<RuleJudge> rule_judge;
  std::unique_ptr<RemoteJudge> remote_judge;

  RelationJudge& relation_judge() {
    if (remote_judge) return *remote_judge;
    return *rule_judge;
  }
  RecordJudge& record_judge() {
    if (remote_judge) return *remote_judge;
    return *rule_judge;
  }
};

struct tracer_record {
  Record record;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tracer_status fail(tracer_ctx* ctx, tracer_status status, const std::string& message) {
  if (ctx) ctx->last_error = message;
  return status;
}

// Runs `fn`, translating exceptions to status codes.
template <typename Fn>
tracer_status guarded(tracer_ctx* ctx, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    return fail(ctx, TRACER_ERR_PARSE, e.what());
  } catch (const JudgeError& e) {
    return fail(ctx, TRACER_ERR_EXTERNAL, e.what());
  } catch (const MetricsError& e) {
    return fail(ctx, TRACER_ERR_USAGE, e.what());
  } catch (const GrpoError& e) {
    return fail(ctx, TRACER_ERR_PARSE, e.what());
  } catch (const std::exception& e) {
    return fail(ctx, TRACER_ERR_INTERNAL, e.what());
  }
}

// Output artifacts start with a configuration-echo line; readers skip it.
bool is_header_line(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  return j.is_object() && j.contains("_tracer_config");
}

std::vector<Record> load_corpus(const std::string& path, const Config& config) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Record> corpus;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || is_header_line(line)) continue;
    ParseOptions opts;
    opts.strict_relations = config.strict_relations;
    corpus.push_back(parse_record(line, opts));
  }
  return corpus;
}

VerificationReport verify_with(tracer_ctx* ctx, const Record& record) {
  return verify(record, ctx->relation_judge(), ctx->config.verify);
}

}  // namespace

extern "C" {

const char* tracer_version(void) { return "0.1.0"; }

tracer_status tracer_ctx_new(const char* config_json, tracer_ctx** out) {
  if (!out) return TRACER_ERR_USAGE;
  auto ctx = std::make_unique<tracer_ctx>();
  tracer_status status = guarded(ctx.get(), [&] {
    if (config_json && *config_json) {
      json j = json::parse(config_json, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw std::runtime_error("config is not a JSON object");
      }
      ctx->config = Config::from_json(j);
    } else {
      ctx->config = Config::from_environment();
    }
    ctx->rule_judge = std::make_unique<RuleJudge>(ctx->config.rule_judge);
    if (!ctx->config.judge_endpoint.empty()) {
      RemoteJudgeConfig rc;
      rc.endpoint = ctx->config.judge_endpoint;
      rc.model = ctx->config.judge_model;
      rc.cache_dir = ctx->config.judge_cache_dir;
      if (const char* key = std::getenv("TRACER_JUDGE_API_KEY")) rc.api_key = key;
      ctx->remote_judge = std::make_unique<RemoteJudge>(rc);
    }
    return TRACER_OK;
  });
  if (status == TRACER_OK) {
    *out = ctx.release();
  } else if (status == TRACER_ERR_INTERNAL) {
    status = TRACER_ERR_USAGE;
  }
  return status;
}

void tracer_ctx_free(tracer_ctx* ctx) { delete ctx; }

const char* tracer_last_error(const tracer_ctx* ctx) {
  return ctx ? ctx->last_error.c_str() : "";
}

tracer_status tracer_ctx_config(tracer_ctx* ctx, char** out_json) {
  if (!ctx || !out_json) return TRACER_ERR_USAGE;
  return guarded(ctx, [&] {
    *out_json = dup_string(ctx->config.to_json().dump());
    return TRACER_OK;
  });
}

void tracer_string_free(char* s) { std::free(s); }

tracer_status tracer_record_parse(tracer_ctx* ctx, const char* line, tracer_record** out) {
  if (!ctx || !line || !out) return TRACER_ERR_USAGE;
  return guarded(ctx, [&] {
    ParseOptions opts;
    opts.strict_relations = ctx->config.strict_relations;
    auto rec = std::make_unique<tracer_record>();
    rec->record = parse_record(line, opts);
    if (ctx->config.turn_id_mode != TurnIdMode::PerTool) {
      rec->record.trajectory =
          assign_turn_ids(std::move(rec->record.trajectory), ctx->config.turn_id_mode);
    }
    *out = rec.release();
    return TRACER_OK;
  });
}

void tracer_record_free(tracer_record* record) { delete record; }

tracer_status tracer_record_serialize(tracer_ctx* ctx, const tracer_record* record,
                                      char** out_line) {
  if (!ctx || !record || !out_line) return TRACER_ERR_USAGE;
  return guarded(ctx, [&] {
    *out_line = dup_string(serialize_record(record->record));
    return TRACER_OK;
  });
}

tracer_status tracer_record_id(tracer_ctx* ctx, const tracer_record* record,
                               char** out_id) {
  if (!ctx || !record || !out_id) return TRACER_ERR_USAGE;
  *out_id = dup_string(record->record.instance.id);
  return TRACER_OK;
}

tracer_status tracer_validate(tracer_ctx* ctx, const tracer_record* record,
                              char** out_json) {
  if (!ctx || !record || !out_json) return TRACER_ERR_USAGE;
  return guarded(ctx, [&] {
    SchemaResult res = check_schema(record->record.solution);
    json j{{"id", record->record.instance.id},
           {"c_schema", res.c_schema},
           {"faults", res.faults}};
    *out_json = dup_string(j.dump());
    return TRACER_OK;
  });
}

tracer_status tracer_verify(tracer_ctx* ctx, const tracer_record* record,
                            char** out_json) {
  if (!ctx || !record || !out_json) return TRACER_ERR_USAGE;
  return guarded(ctx, [&] {
    VerificationReport report = verify_with(ctx, record->record);
    json j = report.to_json();
    j["id"] = record->record.instance.id;
    *out_json = dup_string(j.dump());
    return TRACER_OK;
  });
}

tracer_status tracer_reward(tracer_ctx* ctx, const tracer_record* record,
                            const char* report_json, char** out_json) {
  if (!ctx || !record || !out_json) return TRACER_ERR_USAGE;
  return guarded(ctx, [&] {
    VerificationReport report;
    if (report_json && *report_json) {
      json j = json::parse(report_json, nullptr, false);
      if (j.is_discarded()) throw std::runtime_error("report is not valid JSON");
      report = VerificationReport::from_json(j);
    } else {
      report = verify_with(ctx, record->record);
    }
    RewardBreakdown breakdown = score_record(record->record, report,
                                             ctx->config.weights, ctx->config.match_mode);
    json j = breakdown.to_json();
    j["id"] = record->record.instance.id;
    *out_json = dup_string(j.dump());
    return TRACER_OK;
  });
}

tracer_status tracer_advantage(tracer_ctx* ctx, const char* group_json, char** out_json) {
  if (!ctx || !group_json || !out_json) return TRACER_ERR_USAGE;
  return guarded(ctx, [&] {
    RolloutGroup group = parse_group(group_json);
    *out_json = dup_string(group_result_json(group, ctx->config.grpo).dump());
    return TRACER_OK;
  });
}

tracer_status tracer_filter_corpus(tracer_ctx* ctx, const char* in_path,
                                   const char* regenerator, const char* out_corpus_path,
                                   const char* out_decisions_path,
                                   const char* out_parked_path, char** out_report_json) {
  if (!ctx || !in_path || !out_report_json) return TRACER_ERR_USAGE;
  return guarded(ctx, [&] {
    std::vector<Record> corpus = load_corpus(in_path, ctx->config);

    std::string regen_name = regenerator ? regenerator : "identity";
    PipelineConfig pc;
    pc.weights = ctx->config.weights;
    pc.match_mode = ctx->config.match_mode;
    pc.mask_mode = ctx->config.mask_mode;
    pc.drop_rule = ctx->config.drop_rule;
    pc.verify = ctx->config.verify;

    // The per-record scripted regenerators close over each record, so the
    // pipeline is driven record by record here.
    PipelineResult result;
    result.report.input_count = corpus.size();
    std::vector<const Record*> s1;
    for (const auto& rec : corpus) {
      FilterDecision d = stage1(rec, pc);
      result.decisions.push_back(d);
      if (d.kept) s1.push_back(&rec);
    }
    result.report.stage1_kept = s1.size();
    std::vector<const Record*> s2;
    for (const Record* rec : s1) {
      Regenerator regen = regen_name == "always-sensitive"
                              ? always_sensitive_regenerator(*rec)
                              : identity_regenerator(*rec);
      FilterDecision d = stage2(*rec, regen, pc);
      result.decisions.push_back(d);
      if (d.parked) {
        result.parked.push_back(*rec);
        ++result.report.parked;
      } else if (d.kept) {
        s2.push_back(rec);
      }
    }
    result.report.stage2_kept = s2.size();
    for (const Record* rec : s2) {
      FilterDecision d = stage3(*rec, ctx->record_judge());
      result.decisions.push_back(d);
      if (d.parked) {
        result.parked.push_back(*rec);
        ++result.report.parked;
      } else if (d.kept) {
        result.kept.push_back(*rec);
      }
    }
    result.report.stage3_kept = result.kept.size();

    if (out_corpus_path) {
      std::ofstream out(out_corpus_path);
      for (const auto& rec : result.kept) out << serialize_record(rec) << "\n";
    }
    if (out_decisions_path) {
      std::ofstream out(out_decisions_path);
      for (const auto& d : result.decisions) out << d.to_json().dump() << "\n";
    }
    if (out_parked_path) {
      std::ofstream out(out_parked_path);
      for (const auto& rec : result.parked) out << serialize_record(rec) << "\n";
    }
    json report = result.report.to_json();
    report["config"] = ctx->config.to_json();
    *out_report_json = dup_string(report.dump());
    return TRACER_OK;
  });
}

tracer_status tracer_corpus_stats(tracer_ctx* ctx, const char* in_path, char** out_json) {
  if (!ctx || !in_path || !out_json) return TRACER_ERR_USAGE;
  return guarded(ctx, [&] {
    CorpusStats stats = compute_stats(load_corpus(in_path, ctx->config));
    *out_json = dup_string(stats.to_json().dump());
    return TRACER_OK;
  });
}

tracer_status tracer_metrics(tracer_ctx* ctx, const char* pred_path, const char* ref_path,
                             const char* reports_path, const char* summ_path,
                             char** out_json) {
  if (!ctx || !pred_path || !ref_path || !out_json) return TRACER_ERR_USAGE;
  return guarded(ctx, [&] {
    std::vector<Record> pred = load_corpus(pred_path, ctx->config);
    std::vector<Record> ref = load_corpus(ref_path, ctx->config);

    std::vector<VerificationReport> reports;
    if (reports_path) {
      std::ifstream in(reports_path);
      if (!in) throw std::runtime_error(std::string("cannot open ") + reports_path);
      std::string line;
      bool saw_verifier = false;
      bool saw_judge = false;
      while (std::getline(in, line)) {
        if (line.empty() || is_header_line(line)) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw std::runtime_error("report line is not valid JSON");
        if (j.contains("overall_correct")) {
          saw_judge = true;
          if (saw_verifier) throw MetricsError("inconsistent-source: mixed report kinds");
          // Judge verdicts map onto the trace gate only.
          VerificationReport r;
          r.c_schema = 1;
          r.r_trace = j.at("overall_correct").get<bool>() ? 1 : 0;
          reports.push_back(std::move(r));
        } else {
          saw_verifier = true;
          if (saw_judge) throw MetricsError("inconsistent-source: mixed report kinds");
          reports.push_back(VerificationReport::from_json(j));
        }
      }
    } else {
      for (const auto& rec : pred) reports.push_back(verify_with(ctx, rec));
    }

    std::vector<std::pair<std::string, int>> summ;
    if (summ_path) {
      std::ifstream in(summ_path);
      if (!in) throw std::runtime_error(std::string("cannot open ") + summ_path);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || is_header_line(line)) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw std::runtime_error("summ line is not valid JSON");
        summ.emplace_back(j.value("id", ""), j.at("correct").get<int>());
      }
    }

    MetricsReport report = full_report(pred, ref, reports, summ, ctx->config.metrics);
    json j = report.to_json();
    j["config"] = ctx->config.to_json();
    *out_json = dup_string(j.dump());
    return TRACER_OK;
  });
}

tracer_status tracer_synth(tracer_ctx* ctx, uint64_t seed, size_t n,
                           const char* faults_json, const char* corpus_path,
                           const char* labels_path) {
  if (!ctx || !corpus_path) return TRACER_ERR_USAGE;
  return guarded(ctx, [&] {
    std::vector<synth::FaultSpec> faults;
    if (faults_json && *faults_json) {
      json j = json::parse(faults_json, nullptr, false);
      if (j.is_discarded() || !j.is_array()) {
        throw std::runtime_error("faults must be a JSON array");
      }
      for (const auto& fj : j) {
        auto kind = synth::parse_fault_kind(fj.at("kind").get<std::string>());
        if (!kind) throw std::runtime_error("unknown fault kind");
        faults.push_back({*kind, fj.at("rate").get<double>()});
      }
    }
    synth::SynthCorpus corpus = synth::gen_corpus(seed, n, faults);
    {
      std::ofstream out(corpus_path);
      for (const auto& rec : corpus.records) out << serialize_record(rec) << "\n";
    }
    if (labels_path) {
      std::ofstream out(labels_path);
      for (const auto& label : corpus.labels) out << label.to_json().dump() << "\n";
    }
    return TRACER_OK;
  });
}

}  // extern "C"
