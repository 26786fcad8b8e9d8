#include "tracer/synth.hpp"

#include <algorithm>
#include <cmath>

namespace tracer::synth {

namespace {

// splitmix64; keeps corpora byte-identical across platforms and runs.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  size_t below(size_t n) { return static_cast<size_t>(next() % n); }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double rate) { return unit() < rate; }
};

// Observation vocabulary. No stopwords, no letter 'q', all distinct.
const std::vector<std::string>& obs_words() {
  static const std::vector<std::string> words = {
      "yamaha",   "motorcycle", "racing",   "engine",   "factory",  "museum",
      "bridge",   "harbor",     "mountain", "river",    "castle",   "garden",
      "library",  "station",    "market",   "village",  "painter",  "sculptor",
      "composer", "novelist",   "captain",  "pilot",    "farmer",   "teacher",
      "crimson",  "amber",      "violet",   "silver",   "golden",   "emerald",
      "1834",     "1889",       "1902",     "1955",     "2014",     "347",
      "windmill", "lantern",    "anchor",   "compass",  "telescope", "ladder",
      "bicycle",  "tractor",    "sailboat", "airplane", "festival", "harvest",
      "winter",   "summer",     "meadow",   "forest",   "desert",   "island",
      "granite",  "marble",     "copper",   "bronze",   "timber",   "ceramic",
      "falcon",   "heron",      "badger",   "salmon",   "walrus",   "beetle"};
  return words;
}

// Words injected as out-of-observation content (claims, wrong answers).
const std::vector<std::string>& novel_words() {
  static const std::vector<std::string> words = {
      "roughly", "altogether", "evidently", "thereabouts", "combined",
      "derived", "totaling",   "spanning",  "presumably",  "reportedly"};
  return words;
}

std::string join(const std::vector<std::string>& words, size_t begin, size_t end) {
  std::string out;
  for (size_t i = begin; i < end; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += words[i];
  }
  return out;
}

struct ItemPlan {
  int sentence_id;
  int item_index;
  int v_turn = 1;
  int v_src = 1;
  int v_rel = 1;
};

ProvenanceItem* item_at(Record& record, const ItemPlan& plan) {
  for (auto& s : record.solution.sentences) {
    if (s.sentence_id == plan.sentence_id &&
        plan.item_index < static_cast<int>(s.provenance.size())) {
      return &s.provenance[plan.item_index];
    }
  }
  return nullptr;
}

}  // namespace

std::string_view fault_kind_name(FaultKind kind) {
  switch (kind) {
    case FaultKind::BadTurnId: return "bad-turn-id";
    case FaultKind::FabricatedSource: return "fabricated-source";
    case FaultKind::SplicedSource: return "spliced-source";
    case FaultKind::WrongRelation: return "wrong-relation";
    case FaultKind::MissingProvenance: return "missing-provenance";
    case FaultKind::IdGap: return "id-gap";
    case FaultKind::ReconstructionBreak: return "reconstruction-break";
    case FaultKind::WrongAnswer: return "wrong-answer";
    case FaultKind::UncitedTurn: return "uncited-turn";
  }
  return "";
}

std::optional<FaultKind> parse_fault_kind(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(FaultKind::UncitedTurn); ++i) {
    auto kind = static_cast<FaultKind>(i);
    if (fault_kind_name(kind) == name) return kind;
  }
  return std::nullopt;
}

json RecordLabel::to_json() const {
  json verdicts = json::array();
  for (const auto& v : expected_verdicts) {
    verdicts.push_back({{"sentence_id", v.sentence_id},
                        {"item_index", v.item_index},
                        {"v_turn", v.v_turn},
                        {"v_src", v.v_src},
                        {"v_rel", v.v_rel},
                        {"v", v.v}});
  }
  return json{{"record_id", record_id},
              {"injected_faults", injected_faults},
              {"expected_c_schema", expected_c_schema},
              {"expected_verdicts", verdicts},
              {"expected_r_trace", expected_r_trace},
              {"expected_reward", expected_reward.to_json()}};
}

SynthCorpus gen_corpus(std::uint64_t seed, size_t n, const std::vector<FaultSpec>& faults) {
  SynthCorpus corpus;
  Rng rng(seed ^ 0x7261636572ULL);

  for (size_t idx = 0; idx < n; ++idx) {
    Record record;
    record.instance.id = "synth-" + std::to_string(seed) + "-" + std::to_string(idx);
    record.instance.tools_available = tool_inventory();

    // Trajectory: 1-4 turns with distinct-word observations.
    const size_t turn_count = 1 + rng.below(4);
    for (size_t t = 0; t < turn_count; ++t) {
      ToolTurn turn;
      turn.position = static_cast<int>(t + 1);
      Tool tool = tool_inventory()[rng.below(tool_inventory().size())];
      turn.name = std::string(tool_name(tool));
      turn.tool = tool;
      turn.args = obs_words()[rng.below(obs_words().size())];
      // Distinct words: sample a window of a shuffled copy.
      std::vector<std::string> pool = obs_words();
      for (size_t i = pool.size() - 1; i > 0; --i) {
        std::swap(pool[i], pool[rng.below(i + 1)]);
      }
      const size_t len = 10 + rng.below(8);
      turn.observation = join(pool, 0, len);
      record.trajectory.push_back(std::move(turn));
    }
    record.trajectory = assign_turn_ids(std::move(record.trajectory));

    // Sentences: 1-3, the last carries the answer.
    const size_t sentence_count = 1 + rng.below(3);
    std::vector<ItemPlan> plans;
    std::string gold;
    for (size_t s = 0; s < sentence_count; ++s) {
      SentenceRecord sentence;
      sentence.sentence_id = static_cast<int>(s + 1);
      const ToolTurn& turn = record.trajectory[rng.below(record.trajectory.size())];
      auto words = [&] {
        std::vector<std::string> out;
        std::string cur;
        for (char c : turn.observation) {
          if (c == ' ') {
            out.push_back(cur);
            cur.clear();
          } else {
            cur.push_back(c);
          }
        }
        out.push_back(cur);
        return out;
      }();
      const size_t span_len = 6;
      const size_t start = rng.below(words.size() - span_len + 1);
      std::vector<std::string> span(words.begin() + static_cast<long>(start),
                                    words.begin() + static_cast<long>(start + span_len));
      ProvenanceItem item;
      item.tool_id = turn.turn_id;
      item.source_text = join(span, 0, span.size());

      const bool is_last = s + 1 == sentence_count;
      const int relation_pick = is_last ? 0 : static_cast<int>(rng.below(3));
      if (relation_pick == 0) {
        item.relation = Relation::Quotation;
        sentence.text = item.source_text;
      } else if (relation_pick == 1) {
        // 4 span words + 1 novel word: token containment 0.8, recall 0.8.
        item.relation = Relation::Compression;
        sentence.text =
            join(span, 0, 4) + " " + novel_words()[rng.below(novel_words().size())];
      } else {
        // 2 span words + 3 novel words: recall 0.4.
        item.relation = Relation::Inference;
        const size_t base = rng.below(novel_words().size() - 3);
        sentence.text = join(span, 0, 2) + " " + novel_words()[base] + " " +
                        novel_words()[base + 1] + " " + novel_words()[base + 2];
      }
      item.relation_raw = std::string(relation_name(*item.relation));
      if (is_last) gold = span[rng.below(span.size())];
      plans.push_back({sentence.sentence_id, 0, 1, 1, 1});
      sentence.provenance.push_back(std::move(item));
      record.solution.sentences.push_back(std::move(sentence));
    }
    record.instance.gold_answer = gold;
    record.instance.question = "what does the image show about " + gold;
    record.solution.response = reconstruct_response(record.solution.sentences);

    // Fault injection.
    RecordLabel label;
    label.record_id = record.instance.id;
    int c_schema = 1;
    int r_vqa = 1;
    for (const FaultSpec& spec : faults) {
      if (!rng.chance(spec.rate)) continue;
      const bool needs_plan = spec.kind == FaultKind::BadTurnId ||
                              spec.kind == FaultKind::FabricatedSource ||
                              spec.kind == FaultKind::SplicedSource ||
                              spec.kind == FaultKind::WrongRelation;
      if (needs_plan && plans.empty()) continue;
      label.injected_faults.push_back(std::string(fault_kind_name(spec.kind)));
      switch (spec.kind) {
        case FaultKind::BadTurnId: {
          ItemPlan& plan = plans[rng.below(plans.size())];
          if (ProvenanceItem* item = item_at(record, plan)) {
            item->tool_id = "WebSearch_1";
            plan.v_turn = plan.v_src = plan.v_rel = 0;
          }
          break;
        }
        case FaultKind::FabricatedSource: {
          ItemPlan& plan = plans[rng.below(plans.size())];
          if (ProvenanceItem* item = item_at(record, plan); item && plan.v_turn) {
            // 'q' never occurs in the observation vocabulary.
            item->source_text[item->source_text.size() / 2] = 'q';
            plan.v_src = 0;
            plan.v_rel = 0;
          }
          break;
        }
        case FaultKind::SplicedSource: {
          ItemPlan& plan = plans[rng.below(plans.size())];
          if (ProvenanceItem* item = item_at(record, plan); item && plan.v_turn) {
            // First two and last two observation words with a gap between:
            // never contiguous because observation words are distinct.
            const ToolTurn* turn = nullptr;
            for (const auto& t : record.trajectory) {
              if (t.turn_id == item->tool_id) turn = &t;
            }
            if (turn) {
              auto ws = [&] {
                std::vector<std::string> out;
                std::string cur;
                for (char c : turn->observation) {
                  if (c == ' ') {
                    out.push_back(cur);
                    cur.clear();
                  } else {
                    cur.push_back(c);
                  }
                }
                out.push_back(cur);
                return out;
              }();
              item->source_text = ws[0] + " " + ws[1] + " " + ws[ws.size() - 2] + " " +
                                  ws[ws.size() - 1];
              plan.v_src = 0;
              plan.v_rel = 0;
            }
          }
          break;
        }
        case FaultKind::WrongRelation: {
          ItemPlan& plan = plans[rng.below(plans.size())];
          if (ProvenanceItem* item = item_at(record, plan)) {
            // Flip to a relation the rule judge rejects for this pair.
            item->relation = *item->relation == Relation::Quotation
                                 ? Relation::Compression
                                 : Relation::Quotation;
            item->relation_raw = std::string(relation_name(*item->relation));
            if (plan.v_turn && plan.v_src) plan.v_rel = 0;
          }
          break;
        }
        case FaultKind::MissingProvenance: {
          size_t s = rng.below(record.solution.sentences.size());
          int sid = record.solution.sentences[s].sentence_id;
          record.solution.sentences[s].provenance.clear();
          plans.erase(std::remove_if(plans.begin(), plans.end(),
                                     [&](const ItemPlan& p) { return p.sentence_id == sid; }),
                      plans.end());
          c_schema = 0;
          break;
        }
        case FaultKind::IdGap: {
          record.solution.sentences.back().sentence_id += 1;
          for (auto& p : plans) {
            if (p.sentence_id ==
                record.solution.sentences.back().sentence_id - 1) {
              p.sentence_id += 1;
            }
          }
          c_schema = 0;
          break;
        }
        case FaultKind::ReconstructionBreak: {
          record.solution.response += " meanwhile";
          c_schema = 0;
          break;
        }
        case FaultKind::WrongAnswer: {
          record.instance.gold_answer =
              novel_words()[rng.below(novel_words().size())] + std::string("ness");
          r_vqa = 0;
          break;
        }
        case FaultKind::UncitedTurn: {
          ToolTurn turn;
          turn.position = static_cast<int>(record.trajectory.size() + 1);
          Tool tool = tool_inventory()[rng.below(tool_inventory().size())];
          turn.name = std::string(tool_name(tool));
          turn.tool = tool;
          turn.args = "follow up";
          turn.observation = join(obs_words(), 0, 8);
          record.trajectory.push_back(std::move(turn));
          record.trajectory = assign_turn_ids(std::move(record.trajectory));
          break;
        }
      }
    }

    // Expected outcomes from the injection bookkeeping.
    label.expected_c_schema = c_schema;
    int product = 1;
    std::map<std::string, int> valid_citations;
    for (const auto& plan : plans) {
      ItemVerdict v;
      v.sentence_id = plan.sentence_id;
      v.item_index = plan.item_index;
      v.v_turn = plan.v_turn;
      v.v_src = plan.v_src;
      v.v_rel = plan.v_rel;
      v.v = plan.v_turn * plan.v_src * plan.v_rel;
      product *= v.v;
      if (v.v) {
        if (ProvenanceItem* item = item_at(record, plan)) {
          ++valid_citations[item->tool_id];
        }
      }
      label.expected_verdicts.push_back(v);
    }
    if (plans.empty()) product = 1;
    label.expected_r_trace = c_schema * product;

    RewardBreakdown reward;
    reward.r_vqa = r_vqa;
    reward.r_trace = label.expected_r_trace;
    for (const auto& turn : record.trajectory) reward.called_turns.insert(turn.turn_id);
    for (const auto& [turn_id, count] : valid_citations) {
      reward.cited_valid_turns.insert(turn_id);
    }
    reward.r_cite = static_cast<double>(reward.cited_valid_turns.size()) /
                    static_cast<double>(std::max<size_t>(record.trajectory.size(), 1));
    reward.r_total = reward.r_vqa * reward.r_trace * (1.0 + 0.5 * reward.r_cite);
    for (const auto& turn : record.trajectory) {
      int cited = valid_citations.count(turn.turn_id) ? 1 : 0;
      reward.credits[turn.turn_id] = reward.r_vqa * reward.r_trace * cited;
    }
    label.expected_reward = std::move(reward);

    corpus.records.push_back(std::move(record));
    corpus.labels.push_back(std::move(label));
  }
  return corpus;
}

std::vector<RolloutGroup> gen_groups(std::uint64_t seed, size_t n_groups,
                                     size_t group_size_max, size_t tokens_max) {
  std::vector<RolloutGroup> groups;
  Rng rng(seed ^ 0x6772706fULL);
  for (size_t gi = 0; gi < n_groups; ++gi) {
    RolloutGroup group;
    group.group_id = "group-" + std::to_string(seed) + "-" + std::to_string(gi);
    const size_t g = 2 + rng.below(group_size_max - 1);
    for (size_t r = 0; r < g; ++r) {
      Rollout rollout;
      const size_t len = 1 + rng.below(tokens_max);
      for (size_t n = 0; n < len; ++n) {
        rollout.logp_old.push_back(-5.0 * rng.unit());
        rollout.logp_new.push_back(-5.0 * rng.unit());
        rollout.logp_ref.push_back(-5.0 * rng.unit());
      }
      RewardBreakdown reward;
      reward.r_vqa = rng.below(2) ? 1 : 0;
      reward.r_trace = rng.below(2) ? 1 : 0;
      reward.r_cite = static_cast<double>(rng.below(5)) / 4.0;
      reward.r_total = reward.r_vqa * reward.r_trace * (1.0 + 0.5 * reward.r_cite);
      const int gate = reward.r_vqa * reward.r_trace;
      // Up to two disjoint spans over the first tokens.
      size_t cursor = 0;
      int span_count = static_cast<int>(rng.below(3));
      for (int s = 0; s < span_count && cursor < len; ++s) {
        size_t span_len = 1 + rng.below(3);
        size_t end = std::min(cursor + span_len, len);
        std::string turn_id = s == 0 ? "OCR_1" : "GoogleSearch_1";
        rollout.tool_spans.push_back(
            {turn_id, static_cast<int>(cursor), static_cast<int>(end)});
        reward.credits[turn_id] = gate * static_cast<int>(rng.below(2));
        cursor = end + 1;
      }
      rollout.reward = std::move(reward);
      group.rollouts.push_back(std::move(rollout));
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

}  // namespace tracer::synth
