// SPDX-License-Identifier: Apache-2.0
#pragma once

// In-memory triple store behind the four navigation verbs.
//
// Entities and relations are dictionary-encoded into lexicographically sorted
// tables, so sorting by id is sorting by string and every result list comes
// out ordered without a per-query sort. Adjacency is stored twice in CSR form:
//
//   out: head -> [(relation, tail)]   sorted by (relation, tail)
//   in:  tail -> [(relation, head)]   sorted by (relation, head)
//
// The graph is immutable once built; copies share storage.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kgtool {

enum class ToolVerb : std::uint8_t {
  kGetTailRelations,
  kGetHeadRelations,
  kGetTailEntities,
  kGetHeadEntities,
};

inline constexpr std::array<ToolVerb, 4> kAllVerbs = {
    ToolVerb::kGetTailRelations, ToolVerb::kGetHeadRelations,
    ToolVerb::kGetTailEntities, ToolVerb::kGetHeadEntities};

std::string_view verb_name(ToolVerb verb);
std::optional<ToolVerb> parse_verb(std::string_view name);

/// Entity-fetch verbs take (entity, relation); relation-listing verbs take (entity).
constexpr bool is_entity_fetch(ToolVerb verb) {
  return verb == ToolVerb::kGetTailEntities || verb == ToolVerb::kGetHeadEntities;
}

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// Opaque entity token: non-empty, no whitespace.
bool valid_entity_id(std::string_view id);
/// Dotted relation name: non-empty.
bool valid_relation_id(std::string_view id);

struct LoadStats {
  std::size_t triple_rows = 0;
  std::size_t duplicate_triples = 0;
  std::size_t alias_rows = 0;
  /// Aliases that replaced an earlier label for the same entity (last wins).
  std::size_t duplicate_aliases = 0;
};

class KnowledgeGraph {
 public:
  using Alias = std::pair<std::string, std::string>;

  /// The empty graph: zero triples, every query returns [].
  KnowledgeGraph();

  /// Reads `head<TAB>relation<TAB>tail` rows and optional `entity<TAB>label`
  /// rows. Blank lines and lines starting with '#' are skipped. Throws
  /// DataError carrying the offending line number.
  static KnowledgeGraph load(std::istream& triples, std::istream* aliases = nullptr,
                             LoadStats* stats = nullptr);
  static KnowledgeGraph load_files(const std::filesystem::path& triples,
                                   const std::optional<std::filesystem::path>& aliases,
                                   LoadStats* stats = nullptr);
  /// Throws UsageError on an invalid entity or relation id.
  static KnowledgeGraph from_triples(std::span<const Triple> triples,
                                     std::span<const Alias> aliases = {},
                                     LoadStats* stats = nullptr);

  // The four verbs. Results are sorted and duplicate-free; an unknown entity
  // and an entity with no matching edges both yield []. Views point into the
  // graph's storage and stay valid while any copy of the graph is alive.
  std::vector<std::string_view> tail_relations(std::string_view entity) const;
  std::vector<std::string_view> head_relations(std::string_view entity) const;
  std::vector<std::string_view> tail_entities(std::string_view entity,
                                              std::string_view relation) const;
  std::vector<std::string_view> head_entities(std::string_view entity,
                                              std::string_view relation) const;

  /// Alias label if one was loaded, else the raw id.
  std::string_view label_of(std::string_view entity) const;
  bool has_label(std::string_view entity) const;

  bool contains(const Triple& triple) const;
  bool has_entity(std::string_view entity) const;

  std::size_t triple_count() const;
  std::size_t entity_count() const;
  std::size_t relation_count() const;

  /// Sorted relation vocabulary and the number of triples using each entry.
  std::span<const std::string> relations() const;
  std::span<const std::uint64_t> relation_frequencies() const;

  /// Every triple, ordered by (head, relation, tail).
  std::vector<Triple> triples() const;

  /// Re-checks the structural invariants (forward/reverse agreement, sorted
  /// duplicate-free adjacency). Intended for `kgtool load` and tests.
  bool verify() const;

  struct Storage;

 private:
  explicit KnowledgeGraph(std::shared_ptr<const Storage> storage);

  std::shared_ptr<const Storage> storage_;
};

/// Default response cap for rendered tool results.
inline constexpr std::size_t kDefaultResultCap = 100;

/// A rendered tool response, one item per line.
struct ToolResult {
  std::vector<std::string> lines;
  bool truncated = false;

  friend bool operator==(const ToolResult&, const ToolResult&) = default;
};

/// Runs one verb and renders the result: relations as dotted names, entities
/// as their alias label when one exists, else the raw id. `cap == 0` disables
/// truncation. `relation` is ignored by relation-listing verbs.
ToolResult execute(const KnowledgeGraph& graph, ToolVerb verb, std::string_view entity,
                   std::string_view relation, std::size_t cap = kDefaultResultCap);

/// Bounded breadth-first reachability check. Expands from `seeds` along both
/// edge directions and every relation for at most `max_hops` edges, and
/// reports whether any visited entity (seeds included) has a normalized label
/// equal to a normalized gold label. Throws UsageError if `seeds` is empty or
/// `max_hops` is 0.
bool two_hop_solvable(const KnowledgeGraph& graph, std::span<const std::string> seeds,
                      std::span<const std::string> gold_labels, std::size_t max_hops);

}  // namespace kgtool
