// SPDX-License-Identifier: Apache-2.0
#include "kgtool/diagnostics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"
#include "kgtool/error.hpp"
#include "kgtool/text.hpp"

namespace kgtool {

namespace {

constexpr std::array<std::string_view, 4> kBucketNames = {
    "relation-typo-leq1", "entity-correct-wrong-relation", "wrong-entity-near-miss",
    "format-or-genuine-miss"};

constexpr std::array<std::string_view, 4> kDiffNames = {
    "same-entity-different-relation", "different-entity-same-relation", "both-differ",
    "identical"};

const GoldRecord& gold_for(const GoldMap& golds, const std::string& qid) {
  auto it = golds.find(qid);
  if (it == golds.end()) throw DataError("no gold record for qid '" + qid + "'");
  return it->second;
}

bool matches_gold(std::string_view line, const GoldRecord& gold) {
  const auto norm = normalize_answer(line);
  if (norm.empty()) return false;
  return std::find(gold.answers.begin(), gold.answers.end(), norm) != gold.answers.end();
}

bool response_reaches_gold(const Trajectory& traj, const GoldRecord& gold) {
  for (const auto& turn : traj.turns) {
    if (!turn.response) continue;
    for (const auto& line : *turn.response) {
      if (matches_gold(line, gold)) return true;
    }
  }
  return false;
}

std::string extract_answer(const Trajectory& traj, const GoldRecord& gold,
                           ExtractionStrategy strategy) {
  if (strategy == ExtractionStrategy::kQuoteIfPresent) {
    for (const auto& turn : traj.turns) {
      if (!turn.response) continue;
      for (const auto& line : *turn.response) {
        if (matches_gold(line, gold)) return line;
      }
    }
  }
  return traj.final_answer_raw.value_or("");
}

bool answer_em(std::string_view answer, const GoldRecord& gold) {
  const auto norm = normalize_answer(answer);
  return std::find(gold.answers.begin(), gold.answers.end(), norm) != gold.answers.end();
}

// Re-runs every well-formed call against the graph; malformed calls get an
// empty response.
void reexecute(Trajectory& traj, const KnowledgeGraph& graph, std::size_t cap) {
  for (auto& turn : traj.turns) {
    if (!turn.call) continue;
    const ToolCall& call = *turn.call;
    if (!call.parse_ok || !call.verb) {
      turn.response = std::vector<std::string>{};
      continue;
    }
    turn.response =
        execute(graph, *call.verb, call.entity, call.relation.value_or(""), cap).lines;
  }
}

std::string relation_of_first_call(const Trajectory& traj, bool& has_relation) {
  const ToolCall* first = traj.first_call();
  has_relation = first && first->parse_ok && first->relation.has_value();
  return has_relation ? *first->relation : std::string();
}

}  // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0U : 1U)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string_view bucket_name(Bucket b) { return kBucketNames[static_cast<std::size_t>(b)]; }

std::optional<std::size_t> nearest_gold_relation_distance(std::string_view relation,
                                                          const GoldRecord& gold) {
  std::optional<std::size_t> best;
  for (const auto& hop : gold.chain) {
    const auto d = levenshtein(relation, hop.relation);
    if (!best || d < *best) best = d;
  }
  return best;
}

Bucket bucketize(const Trajectory& traj, const GoldRecord& gold) {
  const ToolCall* first = traj.first_call();
  if (first == nullptr || !first->parse_ok) return Bucket::kFormatOrGenuineMiss;

  std::optional<std::size_t> distance;
  if (first->relation) distance = nearest_gold_relation_distance(*first->relation, gold);
  const auto entities = gold.chain_entities();
  const bool entity_on_chain =
      std::find(entities.begin(), entities.end(), first->entity) != entities.end();

  if (distance && *distance == 1) return Bucket::kRelationTypo;
  if (entity_on_chain && (!distance || *distance > 1)) return Bucket::kEntityCorrectWrongRel;
  if (!entity_on_chain && distance && *distance <= 1) return Bucket::kWrongEntityNearMiss;
  return Bucket::kFormatOrGenuineMiss;
}

BucketTable bucket_table(std::span<const Trajectory* const> trajs, const GoldMap& golds) {
  BucketTable table;
  for (const auto* traj : trajs) {
    const auto b = bucketize(*traj, gold_for(golds, traj->question_id));
    ++table.counts[static_cast<std::size_t>(b)];
    ++table.total;
  }
  return table;
}

Enrichment relation_enrichment(std::span<const Trajectory* const> trajs, const GoldMap& golds,
                               const KnowledgeGraph& graph, NullModel model, std::uint64_t seed,
                               std::size_t null_draws) {
  Enrichment out;
  const auto vocab = graph.relations();
  if (vocab.empty() || null_draws == 0) return out;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> uniform(0, vocab.size() - 1);
  const auto freq = graph.relation_frequencies();
  std::discrete_distribution<std::size_t> weighted(freq.begin(), freq.end());
  auto draw = [&] { return model == NullModel::kUniform ? uniform(rng) : weighted(rng); };

  std::size_t observed = 0;
  std::size_t null_hits = 0;
  for (const auto* traj : trajs) {
    bool has_relation = false;
    const auto relation = relation_of_first_call(*traj, has_relation);
    if (!has_relation) continue;
    const GoldRecord& gold = gold_for(golds, traj->question_id);
    if (gold.chain.empty()) continue;
    ++out.n;
    if (*nearest_gold_relation_distance(relation, gold) <= 1) ++observed;
    for (std::size_t d = 0; d < null_draws; ++d) {
      if (*nearest_gold_relation_distance(vocab[draw()], gold) <= 1) ++null_hits;
    }
  }
  if (out.n == 0) return out;
  out.observed_rate = static_cast<double>(observed) / static_cast<double>(out.n);
  out.null_rate = static_cast<double>(null_hits) / static_cast<double>(out.n * null_draws);
  out.ratio = out.null_rate > 0.0 ? out.observed_rate / out.null_rate : 0.0;
  return out;
}

ExtractionStrategy parse_strategy(std::string_view name) {
  if (name == "quote-if-present") return ExtractionStrategy::kQuoteIfPresent;
  if (name == "keep-answer") return ExtractionStrategy::kKeepAnswer;
  throw UsageError("unknown extraction strategy '" + std::string(name) + "'");
}

std::string_view strategy_name(ExtractionStrategy s) {
  return s == ExtractionStrategy::kQuoteIfPresent ? "quote-if-present" : "keep-answer";
}

ReplayResult oracle_relation_replay(const Trajectory& traj, const GoldRecord& gold,
                                    const KnowledgeGraph& graph, ExtractionStrategy strategy,
                                    std::size_t cap) {
  if (gold.chain.empty()) throw UsageError("oracle replay needs a non-empty gold chain");
  ReplayResult r;
  r.baseline = traj;
  reexecute(r.baseline, graph, cap);

  r.replayed = traj;
  std::size_t fetch_index = 0;
  for (auto& turn : r.replayed.turns) {
    if (!turn.call || !turn.call->parse_ok || !turn.call->verb || !is_entity_fetch(*turn.call->verb))
      continue;
    const auto hop = std::min(fetch_index++, gold.chain.size() - 1);
    const std::string& gold_relation = gold.chain[hop].relation;
    if (turn.call->relation != gold_relation) {
      *turn.call = make_call(*turn.call->verb, turn.call->entity, gold_relation);
      ++r.substituted_calls;
    }
  }
  reexecute(r.replayed, graph, cap);

  r.reachable_before = response_reaches_gold(r.baseline, gold);
  r.reachable_after = response_reaches_gold(r.replayed, gold);
  r.baseline_answer = extract_answer(r.baseline, gold, strategy);
  r.replayed_answer = extract_answer(r.replayed, gold, strategy);
  r.replayed.final_answer_raw = r.replayed_answer;
  r.em_original = traj.final_answer_raw && answer_em(*traj.final_answer_raw, gold);
  r.em_baseline = answer_em(r.baseline_answer, gold);
  r.em_replayed = answer_em(r.replayed_answer, gold);
  r.em_delta = static_cast<int>(r.em_replayed) - static_cast<int>(r.em_baseline);
  r.replayed.flags = format_flags(r.replayed);
  return r;
}

SplitCounts split_retrieval_vs_extraction(
    std::span<const std::pair<const Trajectory*, Category>> errors, const GoldMap& golds) {
  SplitCounts counts;
  for (const auto& [traj, category] : errors) {
    if (category != Category::kKgIncomplete && category != Category::kWrongAnswer) {
      throw UsageError("split input must be kg-incomplete or wrong-answer, got " +
                       std::string(category_name(category)));
    }
    if (response_reaches_gold(*traj, gold_for(golds, traj->question_id))) {
      ++counts.extraction;
    } else {
      ++counts.composition;
    }
  }
  return counts;
}

std::string_view diff_kind_name(DiffKind k) { return kDiffNames[static_cast<std::size_t>(k)]; }

DiffKind compare_first_calls(const ToolCall& a, const ToolCall& b) {
  const bool same_entity = a.entity == b.entity;
  const bool same_relation = a.relation == b.relation;
  if (same_entity && same_relation) return DiffKind::kIdentical;
  if (same_entity) return DiffKind::kSameEntityDifferentRelation;
  if (same_relation) return DiffKind::kDifferentEntitySameRelation;
  return DiffKind::kBothDiffer;
}

DiffHistogram behavioral_diff(std::span<const ScoredRecord> run_a,
                              std::span<const ScoredRecord> run_b) {
  std::map<std::string_view, const ScoredRecord*> by_qid;
  for (const auto& rec : run_b) by_qid.emplace(rec.qid, &rec);
  DiffHistogram hist;
  for (const auto& a : run_a) {
    auto it = by_qid.find(a.qid);
    if (it == by_qid.end()) continue;
    ++hist.overlap;
    const ScoredRecord& b = *it->second;
    if (a.category != Category::kKgIncomplete || b.category != Category::kKgIncomplete) continue;
    if (!a.first_call || !b.first_call) continue;
    ++hist.compared;
    ++hist.counts[static_cast<std::size_t>(compare_first_calls(*a.first_call, *b.first_call))];
  }
  if (hist.overlap == 0) throw UsageError("behavioral diff: runs share no qid");
  return hist;
}

ErrorDenominators error_denominators(std::size_t tool_misuse, std::size_t kg_incomplete,
                                     std::size_t wrong_answer, std::size_t strict_em_errors) {
  ErrorDenominators d;
  d.d3_normalized_errors = tool_misuse + kg_incomplete + wrong_answer;
  d.d2_retrieval_dependent = d.d3_normalized_errors - tool_misuse;
  d.d1_strict_em_errors = strict_em_errors;
  return d;
}

ErrorDenominators error_denominators(const RunReport& report, std::size_t strict_em_errors) {
  std::size_t sum = 0;
  for (auto c : report.category_histogram) sum += c;
  if (sum != report.n) {
    throw DataError("category histogram sums to " + std::to_string(sum) + ", expected n = " +
                    std::to_string(report.n));
  }
  if (strict_em_errors > report.n) throw DataError("strict EM error count exceeds n");
  return error_denominators(report.count(Category::kToolMisuse),
                            report.count(Category::kKgIncomplete),
                            report.count(Category::kWrongAnswer), strict_em_errors);
}

std::string to_json(const BucketTable& table) {
  nlohmann::json j = {{"total", table.total}};
  for (auto b : kAllBuckets) j["buckets"][std::string(bucket_name(b))] = table.count(b);
  return j.dump(2);
}

std::string to_json(const DiffHistogram& diff) {
  nlohmann::json j = {{"overlap", diff.overlap}, {"compared", diff.compared}};
  for (std::size_t k = 0; k < kDiffNames.size(); ++k)
    j["histogram"][std::string(kDiffNames[k])] = diff.counts[k];
  return j.dump(2);
}

std::string to_json(const ErrorDenominators& d) {
  nlohmann::json j = {{"d1_strict_em_errors", d.d1_strict_em_errors},
                      {"d2_retrieval_dependent", d.d2_retrieval_dependent},
                      {"d3_normalized_errors", d.d3_normalized_errors}};
  return j.dump(2);
}

namespace {

std::string format_counts(std::span<const std::string_view> names,
                          std::span<const std::size_t> counts, std::size_t total,
                          std::string_view title) {
  std::ostringstream out;
  std::size_t width = title.size();
  for (auto n : names) width = std::max(width, n.size());
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-*s %8s %8s\n", static_cast<int>(width),
                std::string(title).c_str(), "count", "share");
  out << buf;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double share =
        total == 0 ? 0.0 : 100.0 * static_cast<double>(counts[i]) / static_cast<double>(total);
    std::snprintf(buf, sizeof(buf), "%-*s %8zu %7.1f%%\n", static_cast<int>(width),
                  std::string(names[i]).c_str(), counts[i], share);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "%-*s %8zu\n", static_cast<int>(width), "total", total);
  out << buf;
  return out.str();
}

}  // namespace

std::string format_bucket_table(const BucketTable& table) {
  return format_counts(kBucketNames, table.counts, table.total, "bucket");
}

std::string format_diff(const DiffHistogram& diff) {
  return format_counts(kDiffNames, diff.counts, diff.compared, "first-call diff");
}

}  // namespace kgtool
