/* C API for the tracer toolkit shared library.
 *
 * All functions return a tracer_status; output strings are heap-allocated
 * UTF-8 owned by the caller and released with tracer_string_free. Handles
 * are opaque and released with their matching _free function. On error,
 * tracer_last_error(ctx) returns a human-readable message valid until the
 * next call on the same context.
 */
#ifndef TRACER_H
#define TRACER_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tracer_status {
  TRACER_OK = 0,
  TRACER_ERR_PARSE = 1,      /* malformed input data */
  TRACER_ERR_USAGE = 2,      /* bad arguments or configuration */
  TRACER_ERR_EXTERNAL = 3,   /* judge/regenerator/transport failure */
  TRACER_ERR_INTERNAL = 4
} tracer_status;

typedef struct tracer_ctx tracer_ctx;
typedef struct tracer_record tracer_record;

const char* tracer_version(void);

/* config_json may be NULL for defaults; unknown keys are ignored. */
tracer_status tracer_ctx_new(const char* config_json, tracer_ctx** out);
void tracer_ctx_free(tracer_ctx* ctx);
const char* tracer_last_error(const tracer_ctx* ctx);
/* Effective configuration as JSON (for echoing into output artifacts). */
tracer_status tracer_ctx_config(tracer_ctx* ctx, char** out_json);

void tracer_string_free(char* s);

/* ---- record format ---- */
tracer_status tracer_record_parse(tracer_ctx* ctx, const char* line,
                                  tracer_record** out);
void tracer_record_free(tracer_record* record);
tracer_status tracer_record_serialize(tracer_ctx* ctx, const tracer_record* record,
                                      char** out_line);
tracer_status tracer_record_id(tracer_ctx* ctx, const tracer_record* record,
                               char** out_id);

/* ---- per-record operations; results are JSON strings ---- */
/* Schema check only: {"c_schema":0|1,"faults":[...]} */
tracer_status tracer_validate(tracer_ctx* ctx, const tracer_record* record,
                              char** out_json);
/* Full verification report (rule judge unless a remote judge is configured). */
tracer_status tracer_verify(tracer_ctx* ctx, const tracer_record* record,
                            char** out_json);
/* Reward breakdown; report_json may be NULL to verify on the fly. */
tracer_status tracer_reward(tracer_ctx* ctx, const tracer_record* record,
                            const char* report_json, char** out_json);

/* ---- rollout groups ---- */
/* group_json is one rollout-group line; returns advantages + objective. */
tracer_status tracer_advantage(tracer_ctx* ctx, const char* group_json,
                               char** out_json);

/* ---- file-level operations ---- */
/* Three-stage filtering over a JSONL corpus. The regenerator is selected by
 * name: "identity" or "always-sensitive" (scripted), or an HTTP endpoint
 * URL. Outputs: kept corpus, decisions JSONL, parked JSONL, report JSON. */
tracer_status tracer_filter_corpus(tracer_ctx* ctx, const char* in_path,
                                   const char* regenerator, const char* out_corpus_path,
                                   const char* out_decisions_path,
                                   const char* out_parked_path, char** out_report_json);

/* Corpus statistics as JSON. */
tracer_status tracer_corpus_stats(tracer_ctx* ctx, const char* in_path,
                                  char** out_json);

/* Benchmark metrics. reports_path and summ_path may be NULL. */
tracer_status tracer_metrics(tracer_ctx* ctx, const char* pred_path,
                             const char* ref_path, const char* reports_path,
                             const char* summ_path, char** out_json);

/* Deterministic synthetic corpus + labels. faults_json:
 * [{"kind":"fabricated-source","rate":0.25}, ...] or NULL. */
tracer_status tracer_synth(tracer_ctx* ctx, uint64_t seed, size_t n,
                           const char* faults_json, const char* corpus_path,
                           const char* labels_path);

#ifdef __cplusplus
}
#endif

#endif /* TRACER_H */
