// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reward components and the ladder composites built from them.
//
// Answer-level components take pre-normalized strings (see normalize_answer)
// and score against the best-matching gold. Trajectory-level components read
// only the trajectory; r_path is the one that needs the gold chain. Every
// per-call fraction defines 0/0 as 0.

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgtool/gold.hpp"
#include "kgtool/trajectory.hpp"

namespace kgtool {

enum class Component {
  kEm,
  kF1,
  kOut,
  kValid,
  kPath,
  kCoh,
  kToolType,
  kToolUsage,
  kRetrv,
  kAns,
};

/// "r_em", "r_f1", ..., "r_ans".
std::string_view component_name(Component c);

double r_em(std::string_view answer, std::span<const std::string> golds);
double r_f1(std::string_view answer, std::span<const std::string> golds);
double r_out(std::string_view answer, std::span<const std::string> golds);
/// Best fraction of a gold's tokens that occur among the answer's tokens.
double lenient_match(std::string_view answer, std::span<const std::string> golds);
/// 0.5 * lenient_match + 0.5 * r_f1.
double r_ans(std::string_view answer, std::span<const std::string> golds);

double r_valid(const Trajectory& traj);
double r_path(const Trajectory& traj, const GoldRecord& gold);
double r_coh(const Trajectory& traj);
double r_tool_type(const Trajectory& traj);
double r_tool_usage(const Trajectory& traj);
double r_retrv(const Trajectory& traj);

/// A call is productive when its response is non-empty and some normalized
/// response line occurs inside the normalized final answer.
bool productive(const Turn& turn, std::string_view normalized_answer);

/// Token sequence used by r_coh: lowercased, split on whitespace and "(),".
std::vector<std::string> coherence_tokens(std::string_view text);
/// 2 * LCS(a, b) / (|a| + |b|); 0 when both are empty.
double lcs_ratio(std::span<const std::string> a, std::span<const std::string> b);

struct Rung {
  std::string name;
  std::vector<std::pair<Component, double>> weights;
};

/// The six ladder rungs in order: R-binary, R-binary-SR, R-stepwise,
/// R-toolverbs, R-toolverbs·KL, R-selfV. Trainer-side variants (-SR, ·KL)
/// share their base rung's weights.
const std::vector<Rung>& ladder();

/// Looks a rung up by name. "R-toolverbs-KL" and "R-toolverbs.KL" are
/// accepted as ASCII spellings of "R-toolverbs·KL". Throws UsageError.
const Rung& find_rung(std::string_view name);

struct RewardBreakdown {
  std::string rung;
  /// Raw component values, keyed by component name.
  std::map<std::string, double> components;
  /// Each component multiplied by its rung weight.
  std::map<std::string, double> weighted;
  double total = 0.0;
};

/// Any component value, computed on demand.
double component_value(Component c, const Trajectory& traj, const GoldRecord& gold);

RewardBreakdown score(const Rung& rung, const Trajectory& traj, const GoldRecord& gold);
RewardBreakdown score(std::string_view rung_name, const Trajectory& traj, const GoldRecord& gold);

std::string to_json(const RewardBreakdown& breakdown);

}  // namespace kgtool
