// SPDX-License-Identifier: Apache-2.0
#include "kgtool/classifier.hpp"

#include <algorithm>
#include <unordered_set>

#include "kgtool/reward.hpp"
#include "kgtool/text.hpp"

namespace kgtool {

namespace {

constexpr std::array<std::string_view, 7> kCategoryNames = {
    "correct-via-tool", "correct-via-memory", "correct-no-tool", "wrong-no-tool",
    "kg-incomplete",    "tool-misuse",        "wrong-answer"};

}  // namespace

std::string_view category_name(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<Category> parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  }
  return std::nullopt;
}

bool is_correct(Category c) {
  return c == Category::kCorrectViaTool || c == Category::kCorrectViaMemory ||
         c == Category::kCorrectNoTool;
}

bool entity_in_answer(const Trajectory& traj) {
  const std::string answer = normalize_answer(traj.final_answer_raw.value_or(""));
  return std::any_of(traj.turns.begin(), traj.turns.end(),
                     [&](const Turn& turn) { return productive(turn, answer); });
}

bool normalized_em(const Trajectory& traj, const GoldRecord& gold) {
  if (!traj.final_answer_raw) return false;
  return r_em(normalize_answer(*traj.final_answer_raw), gold.answers) == 1.0;
}

bool strict_em(const Trajectory& traj, const GoldRecord& gold) {
  if (!traj.final_answer_raw) return false;
  const auto answer = trim(*traj.final_answer_raw);
  return std::any_of(gold.answers_raw.begin(), gold.answers_raw.end(),
                     [&](const std::string& g) { return trim(g) == answer; });
}

bool disjoint_from_gold(const Trajectory& traj, const GoldRecord& gold, const KnowledgeGraph& g) {
  std::unordered_set<std::string> exact;
  std::unordered_set<std::string> normalized;
  for (const auto& e : gold.chain_entities()) {
    exact.insert(e);
    auto label = normalize_answer(g.label_of(e));
    if (!label.empty()) normalized.insert(std::move(label));
  }
  for (const auto& r : gold.chain_relations()) exact.insert(r);

  for (const auto& turn : traj.turns) {
    if (!turn.response) continue;
    for (const auto& line : *turn.response) {
      if (exact.contains(line) || normalized.contains(normalize_answer(line))) return false;
    }
  }
  return true;
}

Category classify(const Trajectory& traj, const GoldRecord& gold, const KnowledgeGraph& g) {
  const auto calls = traj.calls();
  if (normalized_em(traj, gold)) {
    if (calls.empty()) return Category::kCorrectNoTool;
    if (entity_in_answer(traj)) return Category::kCorrectViaTool;
    return Category::kCorrectViaMemory;
  }
  if (calls.empty()) return Category::kWrongNoTool;
  if (std::any_of(calls.begin(), calls.end(), [](const ToolCall* c) { return !c->parse_ok; }))
    return Category::kToolMisuse;
  const bool all_empty = std::none_of(traj.turns.begin(), traj.turns.end(),
                                      [](const Turn& t) { return t.has_nonempty_response(); });
  if (all_empty || disjoint_from_gold(traj, gold, g)) return Category::kKgIncomplete;
  return Category::kWrongAnswer;
}

}  // namespace kgtool
