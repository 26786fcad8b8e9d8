#include <cmath>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "tracer/synth.hpp"

// Naive straight-line reimplementations. Deliberately duplicated logic:
// these must not share code paths with the main implementations they check.

namespace tracer::oracle {

namespace {

const char* kStop[] = {
    "a",    "an",   "the",  "and",  "or",    "but",  "if",    "then",
    "is",   "are",  "was",  "were", "be",    "been", "being", "of",
    "to",   "in",   "on",   "at",   "by",    "for",  "with",  "from",
    "as",   "it",   "its",  "this", "that",  "these", "those", "he",
    "she",  "they", "we",   "you",  "i",     "his",  "her",   "their",
    "not",  "no",   "so",   "do",   "does",  "did",  "has",   "have",
    "had",  "which"};

bool naive_stop(const std::string& w) {
  for (const char* s : kStop) {
    if (w == s) return true;
  }
  return false;
}

bool naive_digit(char c) { return c >= '0' && c <= '9'; }

// Mirrors the loose normalization rule: lowercase, punctuation to spaces
// except ',' and '.' between digits, collapse whitespace.
std::string naive_loose(const std::string& s) {
  std::string mapped;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    unsigned char uc = static_cast<unsigned char>(c);
    if (c >= 'A' && c <= 'Z') {
      mapped.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if ((c >= 'a' && c <= 'z') || naive_digit(c) || uc >= 0x80) {
      mapped.push_back(c);
    } else if (c == ',' || c == '.') {
      bool left = i > 0 && naive_digit(s[i - 1]);
      bool right = i + 1 < s.size() && naive_digit(s[i + 1]);
      mapped.push_back(left && right ? c : ' ');
    } else {
      mapped.push_back(' ');
    }
  }
  std::string out;
  for (char c : mapped) {
    if (c == ' ') {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> naive_split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Linear scan substring search, no library calls.
bool naive_substring(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return false;
  if (needle.size() > haystack.size()) return false;
  for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    size_t j = 0;
    while (j < needle.size() && haystack[i + j] == needle[j]) ++j;
    if (j == needle.size()) return true;
  }
  return false;
}

bool naive_in(const std::vector<std::string>& list, const std::string& w) {
  for (const auto& x : list) {
    if (x == w) return true;
  }
  return false;
}

int naive_relation_ok(const std::string& source, const std::string& claim,
                      Relation relation) {
  std::string ns = naive_loose(source);
  std::string nc = naive_loose(claim);
  std::vector<std::string> st = naive_split(ns);
  std::vector<std::string> ct = naive_split(nc);
  std::vector<std::string> s_content;
  std::vector<std::string> c_content;
  for (const auto& w : st) {
    if (!naive_stop(w)) s_content.push_back(w);
  }
  for (const auto& w : ct) {
    if (!naive_stop(w)) c_content.push_back(w);
  }

  size_t hit = 0;
  for (const auto& w : ct) {
    if (naive_in(st, w)) ++hit;
  }
  double containment = ct.empty() ? 0.0 : static_cast<double>(hit) / ct.size();
  bool verbatim = naive_substring(ns, nc);
  bool quote_like = verbatim || containment >= 0.90;

  size_t chit = 0;
  for (const auto& w : c_content) {
    if (naive_in(s_content, w)) ++chit;
  }
  double recall = c_content.empty() ? 0.0 : static_cast<double>(chit) / c_content.size();

  if (relation == Relation::Quotation) return quote_like ? 1 : 0;
  if (relation == Relation::Compression) {
    return (!verbatim && ct.size() < st.size() && recall >= 0.70) ? 1 : 0;
  }
  return recall >= 0.30 ? 1 : 0;
}

std::string naive_squash_ws(const std::string& s) {
  std::string out;
  for (char c : s) {
    bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (space) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace

VerificationReport oracle_verify(const Record& record) {
  VerificationReport report;

  // Schema.
  bool ids_ok = true;
  for (size_t i = 0; i < record.solution.sentences.size(); ++i) {
    if (record.solution.sentences[i].sentence_id != static_cast<int>(i + 1)) ids_ok = false;
  }
  bool prov_ok = !record.solution.sentences.empty();
  bool rel_ok = true;
  for (const auto& s : record.solution.sentences) {
    if (s.provenance.empty()) prov_ok = false;
    for (const auto& p : s.provenance) {
      if (!p.relation) rel_ok = false;
    }
  }
  std::string joined;
  for (const auto& s : record.solution.sentences) {
    if (!joined.empty()) joined.push_back(' ');
    joined += s.text;
  }
  bool recon_ok = naive_squash_ws(joined) == naive_squash_ws(record.solution.response);
  if (!ids_ok) report.schema_faults.push_back("gap-in-ids");
  if (!prov_ok) report.schema_faults.push_back("missing-provenance");
  if (!rel_ok) report.schema_faults.push_back("bad-relation-label");
  if (!recon_ok) report.schema_faults.push_back("reconstruction-mismatch");
  report.c_schema = (ids_ok && prov_ok && rel_ok && recon_ok) ? 1 : 0;

  int product = 1;
  for (const auto& sentence : record.solution.sentences) {
    int item_index = 0;
    for (const auto& item : sentence.provenance) {
      ItemVerdict v;
      v.sentence_id = sentence.sentence_id;
      v.item_index = item_index++;
      const ToolTurn* turn = nullptr;
      for (const auto& t : record.trajectory) {
        if (t.turn_id == item.tool_id) turn = &t;
      }
      v.v_turn = turn ? 1 : 0;
      if (turn) {
        v.v_src = naive_substring(turn->observation, item.source_text) ? 1 : 0;
        if (v.v_src && item.relation) {
          v.v_rel = naive_relation_ok(item.source_text, sentence.text, *item.relation);
        }
      }
      v.v = v.v_turn * v.v_src * v.v_rel;
      product *= v.v;
      report.verdicts.push_back(v);
    }
  }
  report.r_trace = report.c_schema * product;
  return report;
}

double oracle_objective(const RolloutGroup& group, const GrpoConfig& config) {
  // Pooled raw scores.
  std::vector<std::vector<double>> raw;
  for (const auto& r : group.rollouts) {
    std::vector<double> scores(r.logp_old.size(), r.reward.r_total);
    for (const auto& span : r.tool_spans) {
      int credit = 0;
      auto it = r.reward.credits.find(span.turn_id);
      if (it != r.reward.credits.end()) credit = it->second;
      for (int n = span.start; n < span.end; ++n) {
        scores[static_cast<size_t>(n)] += config.lambda * credit;
      }
    }
    raw.push_back(scores);
  }
  double sum = 0.0;
  size_t count = 0;
  for (const auto& scores : raw) {
    for (double s : scores) {
      sum += s;
      ++count;
    }
  }
  double mu = sum / static_cast<double>(count);
  double var = 0.0;
  for (const auto& scores : raw) {
    for (double s : scores) var += (s - mu) * (s - mu);
  }
  double sigma = std::sqrt(var / static_cast<double>(count));

  double total = 0.0;
  for (size_t g = 0; g < group.rollouts.size(); ++g) {
    const Rollout& r = group.rollouts[g];
    double rollout_sum = 0.0;
    for (size_t n = 0; n < r.logp_old.size(); ++n) {
      double adv = (raw[g][n] - mu) / (sigma + config.norm_delta);
      double rho = std::exp(r.logp_new[n] - r.logp_old[n]);
      double clipped = rho;
      if (clipped < 1.0 - config.epsilon) clipped = 1.0 - config.epsilon;
      if (clipped > 1.0 + config.epsilon) clipped = 1.0 + config.epsilon;
      double surrogate = rho * adv;
      double alt = clipped * adv;
      double loss = surrogate < alt ? surrogate : alt;
      double d = r.logp_ref[n] - r.logp_new[n];
      double kl = std::exp(d) - d - 1.0;
      rollout_sum += loss - config.beta * kl;
    }
    total += rollout_sum / static_cast<double>(r.logp_old.size());
  }
  return total / static_cast<double>(group.rollouts.size());
}

size_t oracle_match(const std::vector<ProvLink>& pred, const std::vector<ProvLink>& ref,
                    LinkMatchMode mode) {
  // Maximum bipartite matching by augmenting paths.
  auto agree = [&](const ProvLink& p, const ProvLink& r) {
    if (p.tool_id != r.tool_id || p.relation != r.relation) return false;
    if (p.source_key == r.source_key) return true;
    if (mode == LinkMatchMode::Exact) return false;
    return naive_substring(p.source_key, r.source_key) ||
           naive_substring(r.source_key, p.source_key);
  };
  std::vector<int> match_of_ref(ref.size(), -1);
  std::vector<bool> visited;
  std::function<bool(size_t)> augment = [&](size_t p) -> bool {
    for (size_t r = 0; r < ref.size(); ++r) {
      if (visited[r] || !agree(pred[p], ref[r])) continue;
      visited[r] = true;
      if (match_of_ref[r] < 0 || augment(static_cast<size_t>(match_of_ref[r]))) {
        match_of_ref[r] = static_cast<int>(p);
        return true;
      }
    }
    return false;
  };
  size_t matched = 0;
  for (size_t p = 0; p < pred.size(); ++p) {
    visited.assign(ref.size(), false);
    if (augment(p)) ++matched;
  }
  return matched;
}

}  // namespace tracer::oracle
