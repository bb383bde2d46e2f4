// SPDX-License-Identifier: Apache-2.0
#include "kgtool/policy.hpp"

#include <algorithm>
#include <cmath>

#include "kgtool/classifier.hpp"
#include "kgtool/error.hpp"
#include "kgtool/parallel.hpp"
#include "kgtool/text.hpp"

namespace kgtool {

namespace {

constexpr std::array<std::string_view, 3> kThinkTemplates = {
    "I need to follow {relation} from {entity}. Let me list its relations first.",
    "The question starts at {entity}; the {relation} edge should lead toward the answer.",
    "Next hop: check which relations leave {entity}, then fetch {relation}.",
};

constexpr std::array<std::string_view, 5> kPolicyNames = {
    "gold-path", "quote-and-stop", "ritual-single-call", "format-drift", "memory-answer"};

constexpr std::array<std::string_view, 3> kRejectNames = {"em-fail", "not-productive",
                                                          "format-invalid"};

std::string fill_template(std::string_view pattern, std::string_view entity,
                          std::string_view relation) {
  std::string out;
  std::size_t pos = 0;
  while (pos < pattern.size()) {
    if (pattern.compare(pos, 8, "{entity}") == 0) {
      out += entity;
      pos += 8;
    } else if (pattern.compare(pos, 10, "{relation}") == 0) {
      out += relation;
      pos += 10;
    } else {
      out += pattern[pos++];
    }
  }
  return out;
}

Turn call_turn(const KnowledgeGraph& graph, ToolCall call, std::size_t cap) {
  Turn turn;
  turn.response =
      execute(graph, *call.verb, call.entity, call.relation.value_or(""), cap).lines;
  turn.call = std::move(call);
  return turn;
}

void finish(Trajectory& traj) {
  traj.transcript_bytes = render_transcript(traj).size();
  traj.flags = format_flags(traj);
}

const std::string& first_seed(const GoldRecord& gold) {
  if (gold.seeds.empty()) throw UsageError("gold record " + gold.qid + " has no seed entity");
  return gold.seeds.front();
}

std::string memory_answer(const ScriptedPolicy& policy, const GoldRecord& gold) {
  auto it = policy.memory.find(gold.qid);
  return it != policy.memory.end() ? it->second : policy.fallback_answer;
}

Trajectory quote_and_stop(const ScriptedPolicy& policy, const GoldRecord& gold,
                          const KnowledgeGraph& graph) {
  const std::string& seed = first_seed(gold);
  Trajectory traj;
  traj.question_id = gold.qid;

  ToolCall call;
  if (auto rels = graph.tail_relations(seed); !rels.empty()) {
    call = make_call(ToolVerb::kGetTailEntities, seed, std::string(rels.front()));
  } else if (auto in = graph.head_relations(seed); !in.empty()) {
    call = make_call(ToolVerb::kGetHeadEntities, seed, std::string(in.front()));
  } else {
    // Isolated seed: the single call still happens and comes back empty.
    call = make_call(ToolVerb::kGetTailRelations, seed);
  }
  Turn turn = call_turn(graph, std::move(call), policy.cap);
  traj.final_answer_raw = turn.response->empty() ? std::string() : turn.response->front();
  traj.turns.push_back(std::move(turn));
  finish(traj);
  return traj;
}

Trajectory ritual_single_call(const ScriptedPolicy& policy, const GoldRecord& gold,
                              const KnowledgeGraph& graph) {
  Trajectory traj;
  traj.question_id = gold.qid;
  traj.turns.push_back(
      call_turn(graph, make_call(ToolVerb::kGetTailRelations, first_seed(gold)), policy.cap));
  traj.final_answer_raw = memory_answer(policy, gold);
  finish(traj);
  return traj;
}

Trajectory format_drift(const ScriptedPolicy& policy, const GoldRecord& gold,
                        const KnowledgeGraph& graph) {
  if (!(policy.drift_severity >= 0.0 && policy.drift_severity <= 1.0))
    throw UsageError("drift severity must lie in [0, 1]");
  Trajectory traj = gen_gold_trajectory(gold, graph, policy.template_seed, policy.cap);
  const auto relocate =
      static_cast<std::size_t>(std::llround(policy.drift_severity * static_cast<double>(traj.call_count())));
  std::size_t moved = 0;
  for (auto& turn : traj.turns) {
    if (moved == relocate) break;
    if (!turn.call) continue;
    std::string think = turn.think.value_or("");
    if (!think.empty()) think += ' ';
    think += "<search>" + turn.call->raw_text + "</search>";
    turn.think = std::move(think);
    turn.call.reset();
    turn.response.reset();
    ++moved;
  }
  // A think-only turn followed by a think-less call reads back as one turn.
  std::vector<Turn> merged;
  for (auto& turn : traj.turns) {
    if (!merged.empty() && !merged.back().call && merged.back().think && !turn.think && turn.call) {
      turn.think = std::move(merged.back().think);
      merged.pop_back();
    }
    merged.push_back(std::move(turn));
  }
  traj.turns = std::move(merged);
  finish(traj);
  return traj;
}

Trajectory memory_only(const ScriptedPolicy& policy, const GoldRecord& gold) {
  Trajectory traj;
  traj.question_id = gold.qid;
  traj.final_answer_raw = memory_answer(policy, gold);
  finish(traj);
  return traj;
}

}  // namespace

const std::array<std::string_view, 3>& think_templates() { return kThinkTemplates; }

Trajectory gen_gold_trajectory(const GoldRecord& gold, const KnowledgeGraph& graph,
                               std::uint64_t template_seed, std::size_t cap) {
  if (gold.chain.empty()) throw UsageError("gold record " + gold.qid + " has an empty chain");
  if (gold.chain.size() > kMaxToolCalls)
    throw UsageError("gold chain for " + gold.qid + " needs more than " +
                     std::to_string(kMaxToolCalls) + " calls");
  std::size_t listing_budget = kMaxToolCalls - gold.chain.size();

  Trajectory traj;
  traj.question_id = gold.qid;
  for (std::size_t hop = 0; hop < gold.chain.size(); ++hop) {
    const Triple& step = gold.chain[hop];
    const auto pattern = kThinkTemplates[(template_seed + hop) % kThinkTemplates.size()];
    const std::string think = fill_template(pattern, graph.label_of(step.head), step.relation);

    Turn fetch = call_turn(graph, make_call(ToolVerb::kGetTailEntities, step.head, step.relation), cap);
    const auto tail_label = graph.label_of(step.tail);
    if (!graph.contains(step) ||
        std::find(fetch.response->begin(), fetch.response->end(), tail_label) ==
            fetch.response->end()) {
      throw DataError("gold chain for " + gold.qid + " is not executable at hop " +
                      std::to_string(hop + 1) + " (" + step.head + ", " + step.relation + ", " +
                      step.tail + ")");
    }

    if (listing_budget > 0) {
      --listing_budget;
      Turn listing = call_turn(graph, make_call(ToolVerb::kGetTailRelations, step.head), cap);
      listing.think = think;
      traj.turns.push_back(std::move(listing));
    } else {
      fetch.think = think;
    }
    traj.turns.push_back(std::move(fetch));
  }
  traj.final_answer_raw = gold.answers_raw.front();
  finish(traj);
  return traj;
}

std::string_view policy_name(PolicyKind kind) { return kPolicyNames[static_cast<std::size_t>(kind)]; }

PolicyKind parse_policy(std::string_view name) {
  for (std::size_t i = 0; i < kPolicyNames.size(); ++i) {
    if (kPolicyNames[i] == name) return static_cast<PolicyKind>(i);
  }
  throw UsageError("unknown policy '" + std::string(name) + "'");
}

Trajectory run_policy(const ScriptedPolicy& policy, const GoldRecord& gold,
                      const KnowledgeGraph& graph) {
  switch (policy.kind) {
    case PolicyKind::kGoldPath:
      return gen_gold_trajectory(gold, graph, policy.template_seed, policy.cap);
    case PolicyKind::kQuoteAndStop: return quote_and_stop(policy, gold, graph);
    case PolicyKind::kRitualSingleCall: return ritual_single_call(policy, gold, graph);
    case PolicyKind::kFormatDrift: return format_drift(policy, gold, graph);
    case PolicyKind::kMemoryAnswer: return memory_only(policy, gold);
  }
  throw UsageError("unhandled policy kind");
}

SimulatedRun simulate_run(const ScriptedPolicy& policy, std::span<const GoldRecord> golds,
                          const KnowledgeGraph& graph, const Rung& rung,
                          const ReportOptions& options) {
  SimulatedRun run;
  run.trajectories.resize(golds.size());
  parallel_for(golds.size(), options.threads,
               [&](std::size_t i) { run.trajectories[i] = run_policy(policy, golds[i], graph); });
  const GoldMap index = index_gold({golds.begin(), golds.end()});
  run.scored = run_report(run.trajectories, index, graph, rung, options);
  return run;
}

std::string_view reject_reason_name(RejectReason r) {
  return kRejectNames[static_cast<std::size_t>(r)];
}

DistillFilterResult self_distill_filter(std::span<const Trajectory> trajs, const GoldMap& golds) {
  DistillFilterResult result;
  for (const auto& traj : trajs) {
    auto it = golds.find(traj.question_id);
    if (it == golds.end()) throw DataError("no gold record for qid '" + traj.question_id + "'");
    const GoldRecord& gold = it->second;

    std::optional<RejectReason> reason;
    if (!normalized_em(traj, gold)) {
      reason = RejectReason::kEmFail;
    } else if (!entity_in_answer(traj)) {
      reason = RejectReason::kNotProductive;
    } else if (traj.flags.test(FormatFlag::kMissingAnswerEnvelope) ||
               traj.flags.test(FormatFlag::kUnparsedCall) ||
               traj.flags.test(FormatFlag::kSearchInsideThink)) {
      reason = RejectReason::kFormatInvalid;
    }
    if (reason) {
      result.rejected.emplace_back(traj, *reason);
    } else {
      result.kept.push_back(traj);
    }
  }
  if (!trajs.empty())
    result.yield = static_cast<double>(result.kept.size()) / static_cast<double>(trajs.size());
  return result;
}

}  // namespace kgtool
