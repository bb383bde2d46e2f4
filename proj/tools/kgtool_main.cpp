// SPDX-License-Identifier: Apache-2.0
// kgtool: batch driver and tool-API server.

#include <pthread.h>
#include <signal.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgtool/diagnostics.hpp"
#include "kgtool/error.hpp"
#include "kgtool/pipeline.hpp"
#include "kgtool/policy.hpp"
#include "kgtool/server.hpp"
#include "kgtool/synth.hpp"
#include "kgtool/text.hpp"
#include "kgtool/wire.hpp"

namespace {

using nlohmann::json;
using namespace kgtool;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Path defaults: command-line flag, then environment, then config file.
struct Paths {
  std::string graph;
  std::string aliases;
  std::string gold;
  std::string config;
  std::size_t cap = kDefaultResultCap;
  std::size_t threads = 0;

  void resolve() {
    json cfg = json::object();
    if (!config.empty()) {
      cfg = json::parse(read_text_file(config), nullptr, false);
      if (!cfg.is_object()) throw UsageError("config " + config + " is not a JSON object");
    }
    fill(graph, "KGTOOL_GRAPH", cfg, "graph");
    fill(aliases, "KGTOOL_ALIASES", cfg, "aliases");
    fill(gold, "KGTOOL_GOLD", cfg, "gold");
    if (cap_from_cli == 0 && cfg.contains("cap")) cap = cfg["cap"].get<std::size_t>();
  }

  static void fill(std::string& value, const char* env, const json& cfg, const char* key) {
    if (!value.empty()) return;
    if (const char* v = std::getenv(env); v != nullptr && *v != '\0') {
      value = v;
    } else if (cfg.contains(key) && cfg[key].is_string()) {
      value = cfg[key].get<std::string>();
    }
  }

  std::optional<std::filesystem::path> alias_path() const {
    if (aliases.empty()) return std::nullopt;
    return std::filesystem::path(aliases);
  }

  KnowledgeGraph load_graph(LoadStats* stats = nullptr) const {
    if (graph.empty()) throw UsageError("no graph given (--graph, KGTOOL_GRAPH or config)");
    return load_graph_files(graph, alias_path(), stats);
  }

  GoldMap load_gold() const {
    if (gold.empty()) throw UsageError("no gold file given (--gold, KGTOOL_GOLD or config)");
    return load_gold_file(gold);
  }

  std::size_t cap_from_cli = 0;
};

void add_graph_opts(CLI::App* cmd, Paths& p) {
  cmd->add_option("--graph", p.graph, "Triple TSV (head, relation, tail)");
  cmd->add_option("--aliases", p.aliases, "Alias TSV (entity, label)");
}

void add_gold_opt(CLI::App* cmd, Paths& p) { cmd->add_option("--gold", p.gold, "Gold JSON-lines"); }

std::vector<const Trajectory*> pointers(const std::vector<Trajectory>& trajs) {
  std::vector<const Trajectory*> out;
  out.reserve(trajs.size());
  for (const auto& t : trajs) out.push_back(&t);
  return out;
}

void write_jsonl_file(const std::string& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  write_text_file(path, text);
}

int cmd_load(const Paths& p, bool as_json) {
  LoadStats stats;
  const KnowledgeGraph g = p.load_graph(&stats);
  const bool ok = g.verify();
  json out = {{"triples", g.triple_count()},         {"entities", g.entity_count()},
              {"relations", g.relation_count()},     {"triple_rows", stats.triple_rows},
              {"duplicate_triples", stats.duplicate_triples}, {"alias_rows", stats.alias_rows},
              {"duplicate_aliases", stats.duplicate_aliases}, {"verified", ok}};
  if (as_json) {
    std::cout << out.dump(2) << '\n';
  } else {
    for (auto it = out.begin(); it != out.end(); ++it) std::cout << it.key() << ": " << it.value() << '\n';
  }
  return ok ? 0 : kExitData;
}

sigset_t stop_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  return set;
}

template <typename Server>
int serve_until_signal(Server& server, const std::string& what) {
  server.start();
  std::cerr << "kgtool: " << what << " on port " << server.port() << std::endl;
  const sigset_t set = stop_signals();
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  return 0;
}

int cmd_serve(const Paths& p, const std::string& addr, bool http) {
  auto [host, port] = parse_address(addr);
  ServerOptions opts{host, port, p.cap};
  // Block the stop signals before any thread starts so only sigwait sees them.
  const sigset_t set = stop_signals();
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  KnowledgeGraph g = p.load_graph();
  if (http) {
    HttpToolServer server(std::move(g), opts);
    return serve_until_signal(server, "http tool api listening");
  }
  ToolServer server(std::move(g), opts);
  return serve_until_signal(server, "tool api listening");
}

int cmd_score(const Paths& p, const std::string& traj, const std::string& rung,
              const std::string& out, const std::string& report, const std::string& hard,
              double confidence) {
  ScoreInputs in;
  in.trajectories = traj;
  if (p.gold.empty()) throw UsageError("no gold file given (--gold, KGTOOL_GOLD or config)");
  if (p.graph.empty()) throw UsageError("no graph given (--graph, KGTOOL_GRAPH or config)");
  in.gold = p.gold;
  in.triples = p.graph;
  in.aliases = p.alias_path();
  in.rung = rung;
  in.threads = p.threads;
  in.confidence = confidence;
  if (!hard.empty()) in.hard_subset = hard;
  const ScoredRun run = score_file(in);
  std::ostringstream scored;
  write_scored(scored, run.records);
  write_text_file(out, scored.str());
  write_text_file(report, to_json(run.report) + "\n");
  return 0;
}

int cmd_classify(const Paths& p, const std::string& traj, const std::string& out) {
  const GoldMap golds = p.load_gold();
  const KnowledgeGraph g = p.load_graph();
  const auto trajs = load_trajectories(traj);
  std::vector<std::string> lines;
  std::array<std::size_t, 7> hist{};
  for (const auto& t : trajs) {
    auto it = golds.find(t.question_id);
    if (it == golds.end()) throw DataError("no gold record for qid '" + t.question_id + "'");
    const Category c = classify(t, it->second, g);
    ++hist[static_cast<std::size_t>(c)];
    lines.push_back(json{{"qid", t.question_id}, {"category", category_name(c)}}.dump());
  }
  write_jsonl_file(out, lines);
  for (auto c : kAllCategories)
    std::cerr << category_name(c) << '\t' << hist[static_cast<std::size_t>(c)] << '\n';
  return 0;
}

int cmd_report(const std::vector<std::string>& runs, const std::string& format, double confidence,
               bool denominators) {
  if (runs.empty()) throw UsageError("report needs at least one --run [label=]scored.jsonl");
  std::vector<std::pair<std::string, RunReport>> rows;
  json out = json::array();
  for (const auto& spec : runs) {
    std::string label = spec;
    std::string path = spec;
    if (auto eq = spec.find('='); eq != std::string::npos) {
      label = spec.substr(0, eq);
      path = spec.substr(eq + 1);
    }
    const auto records = read_scored_file(path);
    if (records.empty()) throw DataError(path + ": no scored records");
    ReportOptions opts;
    opts.confidence = confidence;
    RunReport r = aggregate(records, records.front().breakdown.rung, opts);
    json entry = {{"label", label}, {"report", json::parse(to_json(r))}};
    if (denominators) entry["denominators"] = json::parse(to_json(error_denominators(r, r.strict_em_errors)));
    out.push_back(entry);
    rows.emplace_back(label, std::move(r));
  }
  if (format == "json") {
    std::cout << out.dump(2) << '\n';
    return 0;
  }
  std::cout << format_table(rows);
  for (const auto& [label, r] : rows) {
    std::cout << "\n" << label << "\n" << format_histogram(r);
    if (denominators) {
      const auto d = error_denominators(r, r.strict_em_errors);
      std::cout << "D3 normalized errors\t" << d.d3_normalized_errors << "\nD2 retrieval-dependent\t"
                << d.d2_retrieval_dependent << "\nD1 strict-EM errors\t" << d.d1_strict_em_errors << '\n';
    }
  }
  return 0;
}

int cmd_replay(const Paths& p, const std::string& traj, const std::string& strategy_name_arg,
               const std::string& out) {
  const auto strategy = parse_strategy(strategy_name_arg);
  const GoldMap golds = p.load_gold();
  const KnowledgeGraph g = p.load_graph();
  const auto trajs = load_trajectories(traj);
  std::vector<std::string> lines;
  std::size_t n = 0, before = 0, after = 0, em_base = 0, em_replay = 0;
  for (const auto& t : trajs) {
    auto it = golds.find(t.question_id);
    if (it == golds.end()) throw DataError("no gold record for qid '" + t.question_id + "'");
    if (it->second.chain.empty()) continue;
    const ReplayResult r = oracle_relation_replay(t, it->second, g, strategy, p.cap);
    ++n;
    before += r.reachable_before;
    after += r.reachable_after;
    em_base += r.em_baseline;
    em_replay += r.em_replayed;
    lines.push_back(json{{"qid", t.question_id},
                         {"substituted_calls", r.substituted_calls},
                         {"reachable_before", r.reachable_before},
                         {"reachable_after", r.reachable_after},
                         {"baseline_answer", r.baseline_answer},
                         {"replayed_answer", r.replayed_answer},
                         {"em_original", r.em_original},
                         {"em_baseline", r.em_baseline},
                         {"em_replayed", r.em_replayed},
                         {"em_delta", r.em_delta}}
                        .dump());
  }
  if (!out.empty()) write_jsonl_file(out, lines);
  auto share = [&](std::size_t k) { return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n); };
  json summary = {{"n", n},
                  {"strategy", strategy_name(strategy)},
                  {"reachability_before", share(before)},
                  {"reachability_after", share(after)},
                  {"em_baseline", share(em_base)},
                  {"em_replayed", share(em_replay)}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_buckets(const Paths& p, const std::string& traj, bool enrichment, const std::string& null_name,
                std::uint64_t seed, bool as_json) {
  const GoldMap golds = p.load_gold();
  const auto trajs = load_trajectories(traj);
  const auto ptrs = pointers(trajs);
  const BucketTable table = bucket_table(ptrs, golds);
  json out = json::parse(to_json(table));
  if (enrichment) {
    const KnowledgeGraph g = p.load_graph();
    NullModel model;
    if (null_name == "uniform") {
      model = NullModel::kUniform;
    } else if (null_name == "frequency") {
      model = NullModel::kFrequencyWeighted;
    } else {
      throw UsageError("--null must be uniform or frequency");
    }
    const Enrichment e = relation_enrichment(ptrs, golds, g, model, seed);
    out["enrichment"] = {{"n", e.n}, {"observed_rate", e.observed_rate},
                         {"null_rate", e.null_rate}, {"ratio", e.ratio}, {"null", null_name}};
  }
  if (as_json) {
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << format_bucket_table(table);
    if (enrichment) std::cout << "enrichment\t" << out["enrichment"].dump() << '\n';
  }
  return 0;
}

int cmd_diff(const std::string& a, const std::string& b, bool as_json) {
  const auto ra = read_scored_file(a);
  const auto rb = read_scored_file(b);
  const DiffHistogram d = behavioral_diff(ra, rb);
  std::cout << (as_json ? json::parse(to_json(d)).dump(2) + "\n" : format_diff(d));
  return 0;
}

int cmd_gen_sft(const Paths& p, std::uint64_t seed, const std::string& out) {
  const GoldMap golds = p.load_gold();
  const KnowledgeGraph g = p.load_graph();
  std::vector<Trajectory> trajs;
  for (const auto& [qid, gold] : golds) {
    if (gold.chain.empty()) continue;
    trajs.push_back(gen_gold_trajectory(gold, g, seed, p.cap));
  }
  std::ostringstream ss;
  write_trajectories(ss, trajs);
  write_text_file(out, ss.str());
  std::cerr << "kgtool: wrote " << trajs.size() << " gold-path trajectories\n";
  return 0;
}

int cmd_filter(const Paths& p, const std::string& traj, const std::string& kept_path,
               const std::string& rejected_path) {
  const GoldMap golds = p.load_gold();
  const auto trajs = load_trajectories(traj);
  const DistillFilterResult r = self_distill_filter(trajs, golds);
  std::ostringstream kept;
  write_trajectories(kept, r.kept);
  write_text_file(kept_path, kept.str());
  std::map<std::string, std::size_t> reasons;
  std::vector<std::string> lines;
  for (const auto& [t, why] : r.rejected) {
    ++reasons[std::string(reject_reason_name(why))];
    lines.push_back(json{{"qid", t.question_id}, {"reason", reject_reason_name(why)}}.dump());
  }
  if (!rejected_path.empty()) write_jsonl_file(rejected_path, lines);
  json summary = {{"input", trajs.size()}, {"kept", r.kept.size()}, {"yield", r.yield},
                  {"rejected", reasons}};
  std::cerr << summary.dump(2) << '\n';
  return 0;
}

std::map<std::string, std::string, std::less<>> read_memory(const std::string& path) {
  std::map<std::string, std::string, std::less<>> out;
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(path + ": memory rows are qid<TAB>answer", line_no);
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

struct SimArgs {
  std::string policy = "gold-path";
  std::string rung = "R-binary";
  std::string out = "-";
  std::string report;
  std::string memory;
  double drift = 1.0;
  std::uint64_t seed = 0;
};

int cmd_sim(const Paths& p, const SimArgs& a) {
  ScriptedPolicy policy;
  policy.kind = parse_policy(a.policy);
  policy.drift_severity = a.drift;
  policy.template_seed = a.seed;
  policy.cap = p.cap;
  if (!a.memory.empty()) policy.memory = read_memory(a.memory);
  const Rung& rung = find_rung(a.rung);
  const GoldMap golds = p.load_gold();
  const KnowledgeGraph g = p.load_graph();
  std::vector<GoldRecord> records;
  for (const auto& [qid, gold] : golds) records.push_back(gold);
  ReportOptions opts;
  opts.threads = p.threads;
  const SimulatedRun run = simulate_run(policy, records, g, rung, opts);
  std::ostringstream ss;
  write_trajectories(ss, run.trajectories);
  write_text_file(a.out, ss.str());
  const std::string report = to_json(run.scored.report) + "\n";
  if (a.report.empty()) {
    std::cerr << report;
  } else {
    write_text_file(a.report, report);
  }
  return 0;
}

int cmd_synth(const SynthOptions& o, const std::string& dir, bool extended) {
  const SyntheticWorld w = extended ? extended_reference_world(o) : make_synthetic_world(o);
  write_world(w, dir);
  std::cerr << "kgtool: wrote " << w.triples.size() << " triples and " << w.golds.size()
            << " questions to " << dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgtool: knowledge-graph tool API, trajectory scoring and diagnostics"};
  app.require_subcommand(1);
  Paths paths;
  app.add_option("--config", paths.config, "JSON config with default paths and the result cap");
  app.add_option("--cap", paths.cap_from_cli, "Tool result truncation cap (0 = unlimited)");
  app.add_option("--threads", paths.threads, "Worker threads (0 = hardware concurrency)");

  bool as_json = false;
  std::string traj, out = "-", report_path, hard, strategy = "quote-if-present", rung = "R-binary";
  std::string addr = "127.0.0.1:7070", null_name = "uniform", rejected, diff_a, diff_b;
  std::vector<std::string> runs;
  std::string format = "table";
  bool http = false, enrichment = false, denominators = false, extended = false;
  double confidence = 0.95;
  std::uint64_t seed = 0;
  SimArgs sim;
  SynthOptions synth;

  auto* load = app.add_subcommand("load", "Build the graph, verify its indexes and print counts");
  add_graph_opts(load, paths);
  load->add_flag("--json", as_json);

  auto* serve = app.add_subcommand("serve", "Serve the four tool verbs over TCP or HTTP");
  add_graph_opts(serve, paths);
  serve->add_option("--addr", addr, "host:port (port 0 picks one)");
  serve->add_flag("--http", http, "HTTP binding: POST /v1/tool");

  auto* score = app.add_subcommand("score", "Score, classify and aggregate a trajectory dump");
  add_graph_opts(score, paths);
  add_gold_opt(score, paths);
  score->add_option("--traj", traj, "Trajectory JSON-lines")->required();
  score->add_option("--reward", rung, "Reward rung");
  score->add_option("--out", out, "Scored JSON-lines output");
  score->add_option("--report", report_path, "Report JSON output")->required();
  score->add_option("--hard", hard, "File of qids for the hard-partition CvT");
  score->add_option("--confidence", confidence);

  auto* cls = app.add_subcommand("classify", "Assign each trajectory its outcome category");
  add_graph_opts(cls, paths);
  add_gold_opt(cls, paths);
  cls->add_option("--traj", traj)->required();
  cls->add_option("--out", out);

  auto* rep = app.add_subcommand("report", "Summarize scored runs as a table or JSON");
  rep->add_option("--run", runs, "[label=]scored.jsonl, repeatable")->required();
  rep->add_option("--format", format, "table | json")->check(CLI::IsMember({"table", "json"}));
  rep->add_option("--confidence", confidence);
  rep->add_flag("--denominators", denominators, "Also print the three error denominators");

  auto* replay = app.add_subcommand("replay-oracle", "Re-run calls with gold relations substituted");
  add_graph_opts(replay, paths);
  add_gold_opt(replay, paths);
  replay->add_option("--traj", traj)->required();
  replay->add_option("--strategy", strategy, "quote-if-present | keep-answer");
  replay->add_option("--out", report_path, "Per-trajectory JSON-lines");

  auto* buckets = app.add_subcommand("buckets", "Edit-distance buckets of first calls");
  add_graph_opts(buckets, paths);
  add_gold_opt(buckets, paths);
  buckets->add_option("--traj", traj)->required();
  buckets->add_flag("--enrichment", enrichment, "Also compute near-gold relation enrichment");
  buckets->add_option("--null", null_name, "uniform | frequency");
  buckets->add_option("--seed", seed);
  buckets->add_flag("--json", as_json);

  auto* diff = app.add_subcommand("diff", "First-call diff on questions kg-incomplete in both runs");
  diff->add_option("a", diff_a, "Scored JSON-lines of run A")->required();
  diff->add_option("b", diff_b, "Scored JSON-lines of run B")->required();
  diff->add_flag("--json", as_json);

  auto* gen = app.add_subcommand("gen-sft", "Generate gold-path trajectories from the gold chains");
  add_graph_opts(gen, paths);
  add_gold_opt(gen, paths);
  gen->add_option("--seed", seed, "Think-template seed");
  gen->add_option("--out", out);

  auto* filt = app.add_subcommand("filter-distill", "Keep EM-correct, productive, well-formed trajectories");
  add_gold_opt(filt, paths);
  filt->add_option("--traj", traj)->required();
  filt->add_option("--out", out, "Kept trajectories");
  filt->add_option("--rejected", rejected, "Rejected qids with reasons");

  auto* simc = app.add_subcommand("sim", "Run a scripted policy and score it");
  add_graph_opts(simc, paths);
  add_gold_opt(simc, paths);
  simc->add_option("--policy", sim.policy,
                   "gold-path | quote-and-stop | ritual-single-call | format-drift | memory-answer");
  simc->add_option("--reward", sim.rung);
  simc->add_option("--out", sim.out);
  simc->add_option("--report", sim.report);
  simc->add_option("--memory", sim.memory, "qid<TAB>answer table for ritual and memory policies");
  simc->add_option("--drift", sim.drift, "Format-drift severity in [0, 1]");
  simc->add_option("--seed", sim.seed);

  auto* syn = app.add_subcommand("synth", "Write a seeded synthetic graph and gold set");
  syn->add_option("--out", out, "Output directory")->required();
  syn->add_option("--questions", synth.questions);
  syn->add_option("--min-hops", synth.min_hops);
  syn->add_option("--max-hops", synth.max_hops);
  syn->add_option("--distractors", synth.distractors);
  syn->add_option("--seed", synth.seed);
  syn->add_flag("--with-reference", extended, "Include the seven-triple reference graph");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    paths.resolve();
    if (paths.cap_from_cli != 0) paths.cap = paths.cap_from_cli;
    if (*load) return cmd_load(paths, as_json);
    if (*serve) return cmd_serve(paths, addr, http);
    if (*score) return cmd_score(paths, traj, rung, out, report_path, hard, confidence);
    if (*cls) return cmd_classify(paths, traj, out);
    if (*rep) return cmd_report(runs, format, confidence, denominators);
    if (*replay) return cmd_replay(paths, traj, strategy, report_path);
    if (*buckets) return cmd_buckets(paths, traj, enrichment, null_name, seed, as_json);
    if (*diff) return cmd_diff(diff_a, diff_b, as_json);
    if (*gen) return cmd_gen_sft(paths, seed, out);
    if (*filt) return cmd_filter(paths, traj, out, rejected);
    if (*simc) return cmd_sim(paths, sim);
    if (*syn) return cmd_synth(synth, out, extended);
  } catch (const UsageError& e) {
    std::cerr << "kgtool: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "kgtool: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "kgtool: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
