#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tracer/grpo.hpp"
#include "tracer/metrics.hpp"
#include "tracer/model.hpp"
#include "tracer/reward.hpp"
#include "tracer/verify.hpp"

namespace tracer::synth {

enum class FaultKind {
  BadTurnId,
  FabricatedSource,
  SplicedSource,
  WrongRelation,
  MissingProvenance,
  IdGap,
  ReconstructionBreak,
  WrongAnswer,
  UncitedTurn,
};

std::string_view fault_kind_name(FaultKind kind);
std::optional<FaultKind> parse_fault_kind(std::string_view name);

struct FaultSpec {
  FaultKind kind = FaultKind::FabricatedSource;
  double rate = 0.0;
};

struct RecordLabel {
  std::string record_id;
  std::vector<std::string> injected_faults;
  int expected_c_schema = 1;
  // Expected (v_turn, v_src, v_rel) per item in (sentence_id, item_index) order.
  std::vector<ItemVerdict> expected_verdicts;
  int expected_r_trace = 1;
  RewardBreakdown expected_reward;

  json to_json() const;
};

struct SynthCorpus {
  std::vector<Record> records;
  std::vector<RecordLabel> labels;
};

// Deterministic: the seed fully determines the output.
SynthCorpus gen_corpus(std::uint64_t seed, size_t n, const std::vector<FaultSpec>& faults);

// Deterministic random rollout groups for GRPO equivalence runs.
std::vector<RolloutGroup> gen_groups(std::uint64_t seed, size_t n_groups,
                                     size_t group_size_max = 6, size_t tokens_max = 48);

}  // namespace tracer::synth

namespace tracer::oracle {

// Straight-line reimplementations used as independent checks. These share no
// non-trivial code with the main implementations.

VerificationReport oracle_verify(const Record& record);

double oracle_objective(const RolloutGroup& group, const GrpoConfig& config);

size_t oracle_match(const std::vector<ProvLink>& pred, const std::vector<ProvLink>& ref,
                    LinkMatchMode mode);

}  // namespace tracer::oracle
