// SPDX-License-Identifier: Apache-2.0
#pragma once

// Error-analysis procedures over classified runs: edit-distance bucketing of
// the first call, gold-relation replay, the retrieval-composition versus
// answer-extraction split, first-call behavioral diffs between two runs, and
// error-denominator bookkeeping.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgtool/classifier.hpp"
#include "kgtool/gold.hpp"
#include "kgtool/graph.hpp"
#include "kgtool/report.hpp"
#include "kgtool/trajectory.hpp"

namespace kgtool {

/// Unit-cost insert/delete/substitute distance over bytes.
std::size_t levenshtein(std::string_view a, std::string_view b);

enum class Bucket {
  kRelationTypo,            // relation-typo-leq1
  kEntityCorrectWrongRel,   // entity-correct-wrong-relation
  kWrongEntityNearMiss,     // wrong-entity-near-miss
  kFormatOrGenuineMiss,     // format-or-genuine-miss
};

inline constexpr std::array<Bucket, 4> kAllBuckets = {
    Bucket::kRelationTypo, Bucket::kEntityCorrectWrongRel, Bucket::kWrongEntityNearMiss,
    Bucket::kFormatOrGenuineMiss};

std::string_view bucket_name(Bucket b);

/// Smallest edit distance from `relation` to any gold-chain relation, or
/// nullopt when the chain is empty.
std::optional<std::size_t> nearest_gold_relation_distance(std::string_view relation,
                                                          const GoldRecord& gold);

/// Buckets the first call, evaluated in order with first match winning:
///   1. relation at edit distance exactly 1 from a gold relation;
///   2. entity on the gold chain, relation neither equal nor within 1 edit;
///   3. entity off the chain, relation within 1 edit (0 included);
///   4. anything else, including no call or a malformed first call.
/// Entity matching is by id against chain heads and tails. A relation-listing
/// first call has no relation, which never counts as near.
Bucket bucketize(const Trajectory& traj, const GoldRecord& gold);

/// Bucket counts; `total` is the number of trajectories bucketed.
struct BucketTable {
  std::array<std::size_t, 4> counts{};
  std::size_t total = 0;

  std::size_t count(Bucket b) const { return counts[static_cast<std::size_t>(b)]; }
};

/// Throws DataError on a qid with no gold record.
BucketTable bucket_table(std::span<const Trajectory* const> trajs, const GoldMap& golds);

enum class NullModel { kUniform, kFrequencyWeighted };

/// Share of first calls whose relation lies within one edit (0 included) of
/// a gold relation, observed and under a null that swaps each first call's
/// relation for one sampled from the graph's relation vocabulary.
struct Enrichment {
  std::size_t n = 0;
  double observed_rate = 0.0;
  double null_rate = 0.0;
  /// observed / null; 0 when the null rate is 0.
  double ratio = 0.0;
};

Enrichment relation_enrichment(std::span<const Trajectory* const> trajs, const GoldMap& golds,
                               const KnowledgeGraph& graph, NullModel model, std::uint64_t seed,
                               std::size_t null_draws = 20);

/// Answer strategy applied to a (possibly replayed) trajectory.
enum class ExtractionStrategy {
  /// First response line equal (normalized) to a gold answer, else the
  /// trajectory's own answer.
  kQuoteIfPresent,
  /// The trajectory's own answer, unchanged.
  kKeepAnswer,
};

/// "quote-if-present" | "keep-answer"; throws UsageError otherwise.
ExtractionStrategy parse_strategy(std::string_view name);
std::string_view strategy_name(ExtractionStrategy s);

struct ReplayResult {
  /// Calls with gold relations substituted, responses re-executed.
  Trajectory replayed;
  /// Same calls re-executed unchanged.
  Trajectory baseline;
  std::size_t substituted_calls = 0;
  bool reachable_before = false;
  bool reachable_after = false;
  std::string baseline_answer;
  std::string replayed_answer;
  bool em_original = false;
  bool em_baseline = false;
  bool em_replayed = false;
  /// em_replayed - em_baseline: the effect of the relation substitution alone.
  int em_delta = 0;
};

/// Substitutes the gold relation into every entity-fetch call (i-th fetch
/// gets hop min(i, hops - 1)), keeps each call's entity, re-executes every
/// call against `graph`, and extracts an answer with `strategy`. Throws
/// UsageError when the gold chain is empty.
ReplayResult oracle_relation_replay(const Trajectory& traj, const GoldRecord& gold,
                                    const KnowledgeGraph& graph, ExtractionStrategy strategy,
                                    std::size_t cap = kDefaultResultCap);

struct SplitCounts {
  std::size_t composition = 0;
  std::size_t extraction = 0;
};

/// Splits retrieval-dependent errors: extraction failure when some response
/// line equals (normalized) a gold answer, composition failure otherwise.
/// Throws UsageError on any category other than kg-incomplete or wrong-answer.
SplitCounts split_retrieval_vs_extraction(
    std::span<const std::pair<const Trajectory*, Category>> errors, const GoldMap& golds);

enum class DiffKind {
  kSameEntityDifferentRelation,
  kDifferentEntitySameRelation,
  kBothDiffer,
  kIdentical,
};

std::string_view diff_kind_name(DiffKind k);

struct DiffHistogram {
  std::array<std::size_t, 4> counts{};
  std::size_t overlap = 0;
  std::size_t compared = 0;

  std::size_t count(DiffKind k) const { return counts[static_cast<std::size_t>(k)]; }
};

DiffKind compare_first_calls(const ToolCall& a, const ToolCall& b);

/// Compares first calls over qids classified kg-incomplete in both runs.
/// Throws UsageError when the runs share no qid.
DiffHistogram behavioral_diff(std::span<const ScoredRecord> run_a,
                              std::span<const ScoredRecord> run_b);

struct ErrorDenominators {
  std::size_t d3_normalized_errors = 0;
  std::size_t d2_retrieval_dependent = 0;
  std::size_t d1_strict_em_errors = 0;
};

ErrorDenominators error_denominators(std::size_t tool_misuse, std::size_t kg_incomplete,
                                     std::size_t wrong_answer, std::size_t strict_em_errors);

/// Checks that the report's histogram sums to n and the strict count fits in
/// n before computing; throws DataError on a violation.
ErrorDenominators error_denominators(const RunReport& report, std::size_t strict_em_errors);

std::string to_json(const BucketTable& table);
std::string to_json(const DiffHistogram& diff);
std::string to_json(const ErrorDenominators& d);
std::string format_bucket_table(const BucketTable& table);
std::string format_diff(const DiffHistogram& diff);

}  // namespace kgtool
