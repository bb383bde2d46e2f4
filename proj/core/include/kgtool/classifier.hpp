// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "kgtool/gold.hpp"
#include "kgtool/graph.hpp"
#include "kgtool/trajectory.hpp"

namespace kgtool {

enum class Category {
  kCorrectViaTool,
  kCorrectViaMemory,
  kCorrectNoTool,
  kWrongNoTool,
  kKgIncomplete,
  kToolMisuse,
  kWrongAnswer,
};

inline constexpr std::array<Category, 7> kAllCategories = {
    Category::kCorrectViaTool, Category::kCorrectViaMemory, Category::kCorrectNoTool,
    Category::kWrongNoTool,    Category::kKgIncomplete,     Category::kToolMisuse,
    Category::kWrongAnswer};

std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view name);
bool is_correct(Category c);

/// Some call returned a line whose normalized form occurs in the normalized
/// final answer.
bool entity_in_answer(const Trajectory& traj);

/// Normalized exact match of the final answer against any gold answer.
bool normalized_em(const Trajectory& traj, const GoldRecord& gold);
/// Byte-exact match of the trimmed final answer against a trimmed raw gold.
bool strict_em(const Trajectory& traj, const GoldRecord& gold);

/// No response line touches the gold sub-graph: nothing equals a chain entity
/// id, a chain entity label (normalized), or a chain relation name.
bool disjoint_from_gold(const Trajectory& traj, const GoldRecord& gold, const KnowledgeGraph& g);

/// The seven-way decision tree. Correct (normalized EM) trajectories split on
/// call presence and entity-in-answer; wrong ones are checked in order for
/// no call, any malformed call, empty-or-disjoint responses, and fall through
/// to wrong-answer.
Category classify(const Trajectory& traj, const GoldRecord& gold, const KnowledgeGraph& g);

}  // namespace kgtool
