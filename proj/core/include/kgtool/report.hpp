// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgtool/classifier.hpp"
#include "kgtool/gold.hpp"
#include "kgtool/graph.hpp"
#include "kgtool/reward.hpp"
#include "kgtool/stats.hpp"
#include "kgtool/trajectory.hpp"

namespace kgtool {

/// Per-trajectory evaluation result; one line of the scored JSON-lines output.
struct ScoredRecord {
  std::string qid;
  Category category = Category::kWrongAnswer;
  bool em = false;
  bool strict_em = false;
  bool contem = false;
  std::size_t calls = 0;
  std::size_t malformed_calls = 0;
  FormatFlags flags;
  RewardBreakdown breakdown;
  std::optional<ToolCall> first_call;
  /// Parse-ok call count per verb, indexed by ToolVerb.
  std::array<std::size_t, 4> verb_calls{};
};

struct RunReport {
  std::size_t n = 0;
  std::size_t em_count = 0;
  std::size_t contem_count = 0;
  std::size_t cvt_count = 0;
  std::size_t strict_em_errors = 0;
  double em_rate = 0.0;
  double contem_rate = 0.0;
  double cvt_rate = 0.0;
  double tools_per_q = 0.0;
  double confidence = 0.95;
  Interval em_ci;
  Interval contem_ci;
  Interval cvt_ci;
  std::array<std::size_t, 7> category_histogram{};

  std::size_t total_calls = 0;
  std::size_t malformed_calls = 0;
  std::array<std::size_t, 4> verb_calls{};

  std::string rung;
  std::map<std::string, double> mean_components;
  std::map<std::string, double> mean_weighted;
  double mean_total = 0.0;

  /// CvT restricted to a caller-supplied qid subset, when one was given.
  std::optional<std::size_t> hard_n;
  std::optional<std::size_t> hard_cvt_count;

  std::size_t count(Category c) const { return category_histogram[static_cast<std::size_t>(c)]; }
};

struct ReportOptions {
  double confidence = 0.95;
  /// Worker threads for per-trajectory scoring; 0 = hardware concurrency.
  std::size_t threads = 0;
  /// Optional qid subset for hard-partition CvT.
  const std::set<std::string, std::less<>>* hard_subset = nullptr;
};

struct ScoredRun {
  std::vector<ScoredRecord> records;
  RunReport report;
};

/// Scores, classifies and aggregates a run. Per-trajectory work runs in
/// parallel; records come back in input order. Throws DataError on a qid with
/// no gold record and UsageError on an empty run.
ScoredRun run_report(std::span<const Trajectory> trajectories, const GoldMap& golds,
                     const KnowledgeGraph& graph, const Rung& rung,
                     const ReportOptions& options = {});

ScoredRecord score_one(const Trajectory& traj, const GoldRecord& gold, const KnowledgeGraph& graph,
                       const Rung& rung);

/// The reduce step of run_report.
RunReport aggregate(std::span<const ScoredRecord> records, std::string_view rung,
                    const ReportOptions& options = {});

std::string to_json(const ScoredRecord& record);
ScoredRecord scored_record_from_json(std::string_view line);
std::string to_json(const RunReport& report);
RunReport report_from_json(std::string_view text);

/// Aligned text table with columns Step, EM, CvT count, CvT %, Wilson CI,
/// Tools/Q; one row per (step label, report).
std::string format_table(std::span<const std::pair<std::string, RunReport>> rows);

/// Category histogram as aligned text.
std::string format_histogram(const RunReport& report);

}  // namespace kgtool
