// Command-line front end for the tracer shared library.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tracer.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitDataFaults = 1;
constexpr int kExitUsage = 2;
constexpr int kExitExternal = 3;

struct CtxDeleter {
  void operator()(tracer_ctx* ctx) const { tracer_ctx_free(ctx); }
};
using CtxPtr = std::unique_ptr<tracer_ctx, CtxDeleter>;

struct RecordDeleter {
  void operator()(tracer_record* r) const { tracer_record_free(r); }
};
using RecordPtr = std::unique_ptr<tracer_record, RecordDeleter>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  tracer_string_free(s);
  return out;
}

int status_to_exit(tracer_status status) {
  switch (status) {
    case TRACER_OK: return kExitOk;
    case TRACER_ERR_PARSE: return kExitDataFaults;
    case TRACER_ERR_USAGE: return kExitUsage;
    case TRACER_ERR_EXTERNAL: return kExitExternal;
    default: return kExitUsage;
  }
}

// Flag beats file beats default: the file layer is loaded here and flag
// values are overlaid before the context is created.
struct ConfigBuilder {
  std::string config_path;
  json overrides = json::object();

  std::string build() const {
    json base = json::object();
    std::string path = config_path;
    if (path.empty()) {
      if (const char* env = std::getenv("TRACER_CONFIG")) path = env;
    }
    if (!path.empty()) {
      std::ifstream in(path);
      if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
      std::stringstream ss;
      ss << in.rdbuf();
      base = json::parse(ss.str(), nullptr, false);
      if (base.is_discarded() || !base.is_object()) {
        throw CLI::ValidationError("--config", "not a JSON object: " + path);
      }
    }
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
      base[it.key()] = it.value();
    }
    return base.dump();
  }
};

CtxPtr make_ctx(const ConfigBuilder& builder) {
  tracer_ctx* raw = nullptr;
  std::string config = builder.build();
  tracer_status status = tracer_ctx_new(config.c_str(), &raw);
  if (status != TRACER_OK) {
    throw std::runtime_error("invalid configuration");
  }
  return CtxPtr(raw);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istream* in = &std::cin;
  std::ifstream file;
  if (!path.empty() && path != "-") {
    file.open(path);
    if (!file) throw std::runtime_error("cannot open " + path);
    in = &file;
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(*in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open " + path);
  return file;
}

std::string config_header(tracer_ctx* ctx) {
  char* cfg = nullptr;
  tracer_ctx_config(ctx, &cfg);
  json j;
  j["_tracer_config"] = json::parse(take_string(cfg));
  return j.dump();
}

struct LineOutcome {
  tracer_status status = TRACER_OK;
  std::string output;
  std::string error;
};

// Ordered parallel map over input lines; each worker uses its own context.
template <typename Fn>
std::vector<LineOutcome> process_lines(const ConfigBuilder& builder,
                                       const std::vector<std::string>& lines, int jobs,
                                       Fn&& fn) {
  std::vector<LineOutcome> outcomes(lines.size());
  if (jobs < 1) jobs = 1;
  jobs = std::min<int>(jobs, static_cast<int>(std::max<size_t>(lines.size(), 1)));
  std::atomic<size_t> next{0};
  auto worker = [&] {
    CtxPtr ctx = make_ctx(builder);
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= lines.size()) break;
      outcomes[i] = fn(ctx.get(), lines[i]);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return outcomes;
}

int emit(const std::vector<LineOutcome>& outcomes, tracer_ctx* ctx,
         const std::string& out_path, bool strict, const std::string& what,
         size_t fault_count) {
  std::ofstream file;
  std::ostream& out = open_out(out_path, file);
  out << config_header(ctx) << "\n";
  size_t errors = 0;
  bool external = false;
  for (const auto& o : outcomes) {
    if (o.status == TRACER_OK) {
      out << o.output << "\n";
    } else {
      ++errors;
      if (o.status == TRACER_ERR_EXTERNAL) external = true;
      std::cerr << "error: " << o.error << "\n";
    }
  }
  std::cerr << what << ": " << outcomes.size() << " lines, " << errors << " errors, "
            << fault_count << " faults\n";
  if (external) return kExitExternal;
  if (errors > 0) return kExitDataFaults;
  if (strict && fault_count > 0) return kExitDataFaults;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Provenance verification, reward computation, and benchmark toolkit"};
  app.require_subcommand(1);

  ConfigBuilder builder;
  app.add_option("--config", builder.config_path, "Configuration file (JSON)");

  int jobs = 1;
  app.add_option("--jobs", jobs, "Worker parallelism for per-record subcommands");

  auto add_common_overrides = [&](CLI::App* cmd) {
    auto bind_double = [&](const char* flag, const char* key, const char* desc) {
      cmd->add_option_function<double>(
          flag, [&builder, key](double v) { builder.overrides[key] = v; }, desc);
    };
    auto bind_string = [&](const char* flag, const char* key, const char* desc) {
      cmd->add_option_function<std::string>(
          flag, [&builder, key](const std::string& v) { builder.overrides[key] = v; },
          desc);
    };
    bind_double("--w0", "w0", "Base reward weight");
    bind_double("--w-cite", "w_cite", "Citation-efficiency weight");
    bind_double("--lambda", "lambda", "Local credit coefficient");
    bind_double("--epsilon", "epsilon", "Clipping threshold");
    bind_double("--beta", "beta", "KL penalty coefficient");
    bind_string("--match-mode", "match_mode", "Answer matcher: containment|exact");
    bind_string("--turn-id-mode", "turn_id_mode", "Turn id convention: per-tool|global");
    bind_string("--mask-mode", "mask_mode", "Stage-2 masking: span|turn");
    bind_string("--drop-rule", "drop_rule", "Stage-2 drop rule: per-record|per-citation");
    bind_string("--link-match", "link_match", "Link matching: containment|exact");
    bind_string("--judge-endpoint", "judge_endpoint", "Remote judge endpoint URL");
    bind_string("--judge-model", "judge_model", "Remote judge model name");
    bind_string("--judge-cache", "judge_cache_dir", "Judge reply cache directory");
  };

  std::string in_path;
  std::string out_path;
  bool strict = false;

  // validate
  auto* validate = app.add_subcommand("validate", "Schema-check a corpus");
  validate->add_option("--in", in_path, "Input corpus JSONL")->required();
  validate->add_option("--out", out_path, "Output JSONL (default stdout)");
  validate->add_flag("--strict", strict, "Exit 1 when any fault is present");
  add_common_overrides(validate);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Full provenance verification");
  verify_cmd->add_option("--in", in_path, "Input corpus JSONL")->required();
  verify_cmd->add_option("--out", out_path, "Report JSONL (default stdout)");
  verify_cmd->add_flag("--strict", strict, "Exit 1 when any record fails the gate");
  add_common_overrides(verify_cmd);

  // reward
  std::string reports_path;
  auto* reward = app.add_subcommand("reward", "Reward breakdowns");
  reward->add_option("--in", in_path, "Input corpus JSONL")->required();
  reward->add_option("--reports", reports_path, "Verification report JSONL");
  reward->add_option("--out", out_path, "Breakdown JSONL (default stdout)");
  add_common_overrides(reward);

  // advantage
  auto* advantage = app.add_subcommand("advantage", "Group-relative advantages");
  advantage->add_option("--in", in_path, "Rollout group JSONL")->required();
  advantage->add_option("--out", out_path, "Output JSONL (default stdout)");
  add_common_overrides(advantage);

  // filter
  std::string regen = "identity";
  std::string decisions_path;
  std::string parked_path;
  std::string report_path;
  auto* filter = app.add_subcommand("filter", "Three-stage corpus filtering");
  filter->add_option("--in", in_path, "Input corpus JSONL")->required();
  filter->add_option("--out", out_path, "Kept corpus JSONL")->required();
  filter->add_option("--decisions", decisions_path, "Decision JSONL path");
  filter->add_option("--parked", parked_path, "Parked record JSONL path");
  filter->add_option("--report", report_path, "Retention report JSON path");
  filter->add_option("--regenerator", regen,
                     "Regenerator: identity|always-sensitive|<endpoint URL>");
  add_common_overrides(filter);

  // metrics
  std::string ref_path;
  std::string summ_path;
  auto* metrics = app.add_subcommand("metrics", "Benchmark metric report");
  metrics->add_option("--pred", in_path, "Prediction corpus JSONL")->required();
  metrics->add_option("--ref", ref_path, "Reference corpus JSONL")->required();
  metrics->add_option("--reports", reports_path, "Verification/judge report JSONL");
  metrics->add_option("--summ", summ_path, "Summarization eval JSONL");
  metrics->add_option("--out", out_path, "Report JSON (default stdout)");
  add_common_overrides(metrics);

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  stats->add_option("--in", in_path, "Input corpus JSONL")->required();
  stats->add_option("--out", out_path, "Stats JSON (default stdout)");
  add_common_overrides(stats);

  // synth
  std::uint64_t seed = 7;
  std::size_t count = 100;
  std::string faults_json;
  std::string labels_path;
  auto* synth = app.add_subcommand("synth", "Deterministic synthetic corpus");
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--n", count, "Record count");
  synth->add_option("--faults", faults_json,
                    R"(Fault specs, e.g. [{"kind":"fabricated-source","rate":0.2}])");
  synth->add_option("--out", out_path, "Corpus JSONL path")->required();
  synth->add_option("--labels", labels_path, "Labels JSONL path");
  add_common_overrides(synth);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate || *verify_cmd) {
      const bool full = static_cast<bool>(*verify_cmd);
      auto lines = read_lines(in_path);
      std::atomic<size_t> faults{0};
      auto outcomes = process_lines(builder, lines, jobs, [&](tracer_ctx* ctx,
                                                              const std::string& line) {
        LineOutcome o;
        tracer_record* rec = nullptr;
        o.status = tracer_record_parse(ctx, line.c_str(), &rec);
        if (o.status != TRACER_OK) {
          o.error = tracer_last_error(ctx);
          return o;
        }
        RecordPtr guard(rec);
        char* out_json = nullptr;
        o.status = full ? tracer_verify(ctx, rec, &out_json)
                        : tracer_validate(ctx, rec, &out_json);
        if (o.status != TRACER_OK) {
          o.error = tracer_last_error(ctx);
          return o;
        }
        o.output = take_string(out_json);
        json j = json::parse(o.output);
        if (full ? j.value("r_trace", 0) == 0 : j.value("c_schema", 0) == 0) {
          faults.fetch_add(1);
        }
        return o;
      });
      CtxPtr ctx = make_ctx(builder);
      return emit(outcomes, ctx.get(), out_path, strict, full ? "verify" : "validate",
                  faults.load());
    }

    if (*reward) {
      auto lines = read_lines(in_path);
      std::vector<std::string> report_lines;
      if (!reports_path.empty()) {
        for (auto& l : read_lines(reports_path)) {
          json j = json::parse(l, nullptr, false);
          if (j.is_object() && j.contains("_tracer_config")) continue;
          report_lines.push_back(l);
        }
        if (report_lines.size() != lines.size()) {
          std::cerr << "error: report count differs from record count\n";
          return kExitUsage;
        }
      }
      std::atomic<size_t> idx_base{0};
      (void)idx_base;
      std::vector<LineOutcome> outcomes(lines.size());
      CtxPtr ctx = make_ctx(builder);
      for (size_t i = 0; i < lines.size(); ++i) {
        LineOutcome o;
        tracer_record* rec = nullptr;
        o.status = tracer_record_parse(ctx.get(), lines[i].c_str(), &rec);
        if (o.status == TRACER_OK) {
          RecordPtr guard(rec);
          char* out_json = nullptr;
          const char* report =
              report_lines.empty() ? nullptr : report_lines[i].c_str();
          o.status = tracer_reward(ctx.get(), rec, report, &out_json);
          if (o.status == TRACER_OK) {
            o.output = take_string(out_json);
          } else {
            o.error = tracer_last_error(ctx.get());
          }
        } else {
          o.error = tracer_last_error(ctx.get());
        }
        outcomes[i] = o;
      }
      return emit(outcomes, ctx.get(), out_path, false, "reward", 0);
    }

    if (*advantage) {
      auto lines = read_lines(in_path);
      auto outcomes = process_lines(builder, lines, jobs, [&](tracer_ctx* ctx,
                                                              const std::string& line) {
        LineOutcome o;
        char* out_json = nullptr;
        o.status = tracer_advantage(ctx, line.c_str(), &out_json);
        if (o.status == TRACER_OK) {
          o.output = take_string(out_json);
        } else {
          o.error = tracer_last_error(ctx);
        }
        return o;
      });
      CtxPtr ctx = make_ctx(builder);
      return emit(outcomes, ctx.get(), out_path, false, "advantage", 0);
    }

    if (*filter) {
      CtxPtr ctx = make_ctx(builder);
      char* report_json = nullptr;
      tracer_status status = tracer_filter_corpus(
          ctx.get(), in_path.c_str(), regen.c_str(), out_path.c_str(),
          decisions_path.empty() ? nullptr : decisions_path.c_str(),
          parked_path.empty() ? nullptr : parked_path.c_str(), &report_json);
      if (status != TRACER_OK) {
        std::cerr << "error: " << tracer_last_error(ctx.get()) << "\n";
        return status_to_exit(status);
      }
      std::string report = take_string(report_json);
      if (!report_path.empty()) {
        std::ofstream(report_path) << report << "\n";
      } else {
        std::cout << report << "\n";
      }
      std::cerr << "filter: done\n";
      return kExitOk;
    }

    if (*metrics) {
      CtxPtr ctx = make_ctx(builder);
      char* out_json = nullptr;
      tracer_status status = tracer_metrics(
          ctx.get(), in_path.c_str(), ref_path.c_str(),
          reports_path.empty() ? nullptr : reports_path.c_str(),
          summ_path.empty() ? nullptr : summ_path.c_str(), &out_json);
      if (status != TRACER_OK) {
        std::cerr << "error: " << tracer_last_error(ctx.get()) << "\n";
        return status_to_exit(status);
      }
      std::ofstream file;
      open_out(out_path, file) << take_string(out_json) << "\n";
      std::cerr << "metrics: done\n";
      return kExitOk;
    }

    if (*stats) {
      CtxPtr ctx = make_ctx(builder);
      char* out_json = nullptr;
      tracer_status status = tracer_corpus_stats(ctx.get(), in_path.c_str(), &out_json);
      if (status != TRACER_OK) {
        std::cerr << "error: " << tracer_last_error(ctx.get()) << "\n";
        return status_to_exit(status);
      }
      std::ofstream file;
      open_out(out_path, file) << take_string(out_json) << "\n";
      std::cerr << "stats: done\n";
      return kExitOk;
    }

    if (*synth) {
      CtxPtr ctx = make_ctx(builder);
      tracer_status status = tracer_synth(
          ctx.get(), seed, count, faults_json.empty() ? nullptr : faults_json.c_str(),
          out_path.c_str(), labels_path.empty() ? nullptr : labels_path.c_str());
      if (status != TRACER_OK) {
        std::cerr << "error: " << tracer_last_error(ctx.get()) << "\n";
        return status_to_exit(status);
      }
      std::cerr << "synth: wrote " << count << " records\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
