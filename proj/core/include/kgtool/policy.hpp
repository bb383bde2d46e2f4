// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scripted policies: deterministic stand-ins for trained agents that emit the
// behavioral signatures of the known failure modes, plus the rule-based
// gold-path generator and the self-distillation filter.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgtool/gold.hpp"
#include "kgtool/graph.hpp"
#include "kgtool/report.hpp"
#include "kgtool/reward.hpp"
#include "kgtool/trajectory.hpp"

namespace kgtool {

/// Tool-calling turns allowed per question.
inline constexpr std::size_t kMaxToolCalls = 5;

/// The fixed think templates used by the gold-path generator. `{entity}` and
/// `{relation}` are substituted per hop. Changing these strings changes every
/// generated corpus, so they are frozen.
const std::array<std::string_view, 3>& think_templates();

/// Builds the gold-path trajectory: per hop a think span, a relation-listing
/// call on the hop head, then an entity-fetch call with the gold relation.
/// Responses come from executing against `graph`; the final answer is the
/// first gold answer. When the chain is long enough that both calls per hop
/// would exceed kMaxToolCalls, later hops skip the listing call. Throws
/// DataError if a hop's tail is not in the rendered response, and UsageError
/// on an empty chain or more than kMaxToolCalls hops.
Trajectory gen_gold_trajectory(const GoldRecord& gold, const KnowledgeGraph& graph,
                               std::uint64_t template_seed, std::size_t cap = kDefaultResultCap);

enum class PolicyKind {
  kGoldPath,
  kQuoteAndStop,
  kRitualSingleCall,
  kFormatDrift,
  kMemoryAnswer,
};

std::string_view policy_name(PolicyKind kind);
/// Throws UsageError on an unknown name.
PolicyKind parse_policy(std::string_view name);

struct ScriptedPolicy {
  PolicyKind kind = PolicyKind::kGoldPath;
  /// Fraction of calls relocated inside think spans (format-drift), in [0, 1].
  double drift_severity = 1.0;
  /// qid -> answer for the ritual and memory policies.
  std::map<std::string, std::string, std::less<>> memory;
  /// Answer used when `memory` has no entry.
  std::string fallback_answer = "unknown";
  std::uint64_t template_seed = 0;
  std::size_t cap = kDefaultResultCap;
};

/// Runs one policy on one question. Throws UsageError when the policy needs a
/// seed entity and the gold record has none, or on a bad drift severity.
Trajectory run_policy(const ScriptedPolicy& policy, const GoldRecord& gold,
                      const KnowledgeGraph& graph);

struct SimulatedRun {
  std::vector<Trajectory> trajectories;
  ScoredRun scored;
};

SimulatedRun simulate_run(const ScriptedPolicy& policy, std::span<const GoldRecord> golds,
                          const KnowledgeGraph& graph, const Rung& rung,
                          const ReportOptions& options = {});

enum class RejectReason { kEmFail, kNotProductive, kFormatInvalid };

std::string_view reject_reason_name(RejectReason r);

struct DistillFilterResult {
  std::vector<Trajectory> kept;
  std::vector<std::pair<Trajectory, RejectReason>> rejected;
  /// kept / input; 0 for an empty input.
  double yield = 0.0;
};

/// Keeps trajectories that are EM-correct, make at least one productive call,
/// and are format-valid (answer envelope present, no malformed call, no search
/// inside think). Rejections carry the first failing check in that order.
/// Throws DataError on a qid with no gold record.
DistillFilterResult self_distill_filter(std::span<const Trajectory> trajs, const GoldMap& golds);

}  // namespace kgtool
