// SPDX-License-Identifier: Apache-2.0
#include "kgtool/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "kgtool/error.hpp"
#include "kgtool/text.hpp"

namespace kgtool {

namespace {

constexpr std::array<std::string_view, 4> kVerbNames = {
    "get_tail_relations", "get_head_relations", "get_tail_entities", "get_head_entities"};

struct Edge {
  std::uint32_t relation;
  std::uint32_t other;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using EncodedTriple = std::array<std::uint32_t, 3>;

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

using LabelMap = std::unordered_map<std::string, std::string, StringHash, std::equal_to<>>;

}  // namespace

struct KnowledgeGraph::Storage {
  std::vector<std::string> entities;
  std::unordered_map<std::string_view, std::uint32_t> entity_index;
  std::vector<std::string> relations;
  std::unordered_map<std::string_view, std::uint32_t> relation_index;
  std::vector<std::uint64_t> relation_freq;

  std::vector<std::uint64_t> out_offsets;
  std::vector<Edge> out_edges;
  std::vector<std::uint64_t> in_offsets;
  std::vector<Edge> in_edges;

  LabelMap labels;

  std::optional<std::uint32_t> entity(std::string_view id) const {
    auto it = entity_index.find(id);
    if (it == entity_index.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::uint32_t> relation(std::string_view id) const {
    auto it = relation_index.find(id);
    if (it == relation_index.end()) return std::nullopt;
    return it->second;
  }

  std::span<const Edge> out_of(std::uint32_t e) const {
    return {out_edges.data() + out_offsets[e], out_edges.data() + out_offsets[e + 1]};
  }

  std::span<const Edge> in_of(std::uint32_t e) const {
    return {in_edges.data() + in_offsets[e], in_edges.data() + in_offsets[e + 1]};
  }
};

namespace {

// Collects string rows, assigns provisional ids, then re-ranks them so that
// ids follow lexicographic order.
class Dictionary {
 public:
  std::uint32_t intern(std::string_view s) {
    auto it = ids_.find(std::string(s));
    if (it != ids_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(s);
    ids_.emplace(names_.back(), id);
    return id;
  }

  // Returns the old->new id remap and leaves the sorted names in `sorted`.
  std::vector<std::uint32_t> finish(std::vector<std::string>& sorted) {
    std::vector<std::uint32_t> order(names_.size());
    std::iota(order.begin(), order.end(), 0U);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return names_[a] < names_[b]; });
    std::vector<std::uint32_t> remap(names_.size());
    sorted.clear();
    sorted.reserve(names_.size());
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
      remap[order[rank]] = rank;
      sorted.push_back(std::move(names_[order[rank]]));
    }
    ids_.clear();
    names_.clear();
    return remap;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> names_;
};

void build_csr(std::size_t node_count, const std::vector<EncodedTriple>& triples,
               std::size_t key, std::size_t other, std::vector<std::uint64_t>& offsets,
               std::vector<Edge>& edges) {
  offsets.assign(node_count + 1, 0);
  for (const auto& t : triples) ++offsets[t[key] + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  edges.resize(triples.size());
  std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& t : triples) edges[cursor[t[key]]++] = Edge{t[1], t[other]};
  for (std::size_t n = 0; n < node_count; ++n) {
    std::sort(edges.begin() + static_cast<std::ptrdiff_t>(offsets[n]),
              edges.begin() + static_cast<std::ptrdiff_t>(offsets[n + 1]));
  }
}

std::shared_ptr<KnowledgeGraph::Storage> build_storage(
    Dictionary& entities, Dictionary& relations, std::vector<EncodedTriple> triples,
    LabelMap labels, LoadStats* stats) {
  auto storage = std::make_shared<KnowledgeGraph::Storage>();
  const auto entity_remap = entities.finish(storage->entities);
  const auto relation_remap = relations.finish(storage->relations);
  for (auto& t : triples) {
    t[0] = entity_remap[t[0]];
    t[1] = relation_remap[t[1]];
    t[2] = entity_remap[t[2]];
  }
  std::sort(triples.begin(), triples.end());
  const std::size_t before = triples.size();
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  if (stats) stats->duplicate_triples += before - triples.size();

  for (std::uint32_t i = 0; i < storage->entities.size(); ++i)
    storage->entity_index.emplace(storage->entities[i], i);
  for (std::uint32_t i = 0; i < storage->relations.size(); ++i)
    storage->relation_index.emplace(storage->relations[i], i);

  storage->relation_freq.assign(storage->relations.size(), 0);
  for (const auto& t : triples) ++storage->relation_freq[t[1]];

  const std::size_t n = storage->entities.size();
  build_csr(n, triples, 0, 2, storage->out_offsets, storage->out_edges);
  build_csr(n, triples, 2, 0, storage->in_offsets, storage->in_edges);
  storage->labels = std::move(labels);
  return storage;
}

// Reads one logical line; strips a trailing '\r'. Returns false at EOF.
bool next_row(std::istream& in, std::string& line, std::size_t& line_no) {
  if (!std::getline(in, line)) return false;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

bool skippable(std::string_view line) {
  return trim(line).empty() || line.front() == '#';
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

void read_aliases(std::istream& in, LabelMap& labels,
                  LoadStats* stats) {
  std::string line;
  std::size_t line_no = 0;
  while (next_row(in, line, line_no)) {
    if (skippable(line)) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw DataError("alias row must have 2 tab-separated fields, got " +
                          std::to_string(fields.size()),
                      line_no);
    }
    if (!valid_entity_id(fields[0])) throw DataError("invalid entity id in alias row", line_no);
    if (stats) ++stats->alias_rows;
    auto [it, inserted] = labels.insert_or_assign(std::string(fields[0]), std::string(fields[1]));
    if (!inserted && stats) ++stats->duplicate_aliases;
  }
}

std::vector<std::string_view> relation_list(std::span<const Edge> edges,
                                            const std::vector<std::string>& names) {
  std::vector<std::string_view> out;
  std::optional<std::uint32_t> last;
  for (const Edge& e : edges) {
    if (last == e.relation) continue;
    out.push_back(names[e.relation]);
    last = e.relation;
  }
  return out;
}

std::vector<std::string_view> entity_list(std::span<const Edge> edges, std::uint32_t relation,
                                          const std::vector<std::string>& names) {
  auto lo = std::lower_bound(edges.begin(), edges.end(), Edge{relation, 0});
  std::vector<std::string_view> out;
  for (auto it = lo; it != edges.end() && it->relation == relation; ++it)
    out.push_back(names[it->other]);
  return out;
}

}  // namespace

std::string_view verb_name(ToolVerb verb) {
  return kVerbNames[static_cast<std::size_t>(verb)];
}

std::optional<ToolVerb> parse_verb(std::string_view name) {
  for (std::size_t i = 0; i < kVerbNames.size(); ++i) {
    if (kVerbNames[i] == name) return static_cast<ToolVerb>(i);
  }
  return std::nullopt;
}

bool valid_entity_id(std::string_view id) {
  if (id.empty()) return false;
  return std::none_of(id.begin(), id.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  });
}

bool valid_relation_id(std::string_view id) { return !id.empty(); }

KnowledgeGraph::KnowledgeGraph() {
  auto fresh = std::make_shared<Storage>();
  fresh->out_offsets = {0};
  fresh->in_offsets = {0};
  storage_ = std::move(fresh);
}

KnowledgeGraph::KnowledgeGraph(std::shared_ptr<const Storage> storage)
    : storage_(std::move(storage)) {}

KnowledgeGraph KnowledgeGraph::load(std::istream& triples, std::istream* aliases,
                                    LoadStats* stats) {
  Dictionary entities;
  Dictionary relations;
  std::vector<EncodedTriple> encoded;
  std::string line;
  std::size_t line_no = 0;
  while (next_row(triples, line, line_no)) {
    if (skippable(line)) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw DataError("triple row must have 3 tab-separated fields, got " +
                          std::to_string(fields.size()),
                      line_no);
    }
    if (!valid_entity_id(fields[0])) throw DataError("invalid head entity id", line_no);
    if (!valid_relation_id(fields[1])) throw DataError("empty relation", line_no);
    if (!valid_entity_id(fields[2])) throw DataError("invalid tail entity id", line_no);
    encoded.push_back({entities.intern(fields[0]), relations.intern(fields[1]),
                       entities.intern(fields[2])});
    if (stats) ++stats->triple_rows;
  }
  if (triples.bad()) throw DataError("read error on triple stream");

  LabelMap labels;
  if (aliases != nullptr) read_aliases(*aliases, labels, stats);
  return KnowledgeGraph(
      build_storage(entities, relations, std::move(encoded), std::move(labels), stats));
}

KnowledgeGraph KnowledgeGraph::load_files(const std::filesystem::path& triples,
                                          const std::optional<std::filesystem::path>& aliases,
                                          LoadStats* stats) {
  std::ifstream triple_in(triples);
  if (!triple_in) throw DataError("cannot open triple file " + triples.string());
  if (!aliases) return load(triple_in, nullptr, stats);
  std::ifstream alias_in(*aliases);
  if (!alias_in) throw DataError("cannot open alias file " + aliases->string());
  return load(triple_in, &alias_in, stats);
}

KnowledgeGraph KnowledgeGraph::from_triples(std::span<const Triple> triples,
                                            std::span<const Alias> aliases, LoadStats* stats) {
  Dictionary entities;
  Dictionary relations;
  std::vector<EncodedTriple> encoded;
  encoded.reserve(triples.size());
  for (const Triple& t : triples) {
    if (!valid_entity_id(t.head) || !valid_entity_id(t.tail))
      throw UsageError("invalid entity id in triple");
    if (!valid_relation_id(t.relation)) throw UsageError("empty relation in triple");
    encoded.push_back(
        {entities.intern(t.head), relations.intern(t.relation), entities.intern(t.tail)});
    if (stats) ++stats->triple_rows;
  }
  LabelMap labels;
  for (const auto& [entity, label] : aliases) {
    if (!valid_entity_id(entity)) throw UsageError("invalid entity id in alias");
    if (stats) ++stats->alias_rows;
    auto [it, inserted] = labels.insert_or_assign(entity, label);
    if (!inserted && stats) ++stats->duplicate_aliases;
  }
  return KnowledgeGraph(
      build_storage(entities, relations, std::move(encoded), std::move(labels), stats));
}

std::vector<std::string_view> KnowledgeGraph::tail_relations(std::string_view entity) const {
  auto e = storage_->entity(entity);
  if (!e) return {};
  return relation_list(storage_->out_of(*e), storage_->relations);
}

std::vector<std::string_view> KnowledgeGraph::head_relations(std::string_view entity) const {
  auto e = storage_->entity(entity);
  if (!e) return {};
  return relation_list(storage_->in_of(*e), storage_->relations);
}

std::vector<std::string_view> KnowledgeGraph::tail_entities(std::string_view entity,
                                                            std::string_view relation) const {
  auto e = storage_->entity(entity);
  auto r = storage_->relation(relation);
  if (!e || !r) return {};
  return entity_list(storage_->out_of(*e), *r, storage_->entities);
}

std::vector<std::string_view> KnowledgeGraph::head_entities(std::string_view entity,
                                                            std::string_view relation) const {
  auto e = storage_->entity(entity);
  auto r = storage_->relation(relation);
  if (!e || !r) return {};
  return entity_list(storage_->in_of(*e), *r, storage_->entities);
}

std::string_view KnowledgeGraph::label_of(std::string_view entity) const {
  auto it = storage_->labels.find(entity);
  if (it == storage_->labels.end()) return entity;
  return it->second;
}

bool KnowledgeGraph::has_label(std::string_view entity) const {
  return storage_->labels.contains(entity);
}

bool KnowledgeGraph::contains(const Triple& triple) const {
  auto h = storage_->entity(triple.head);
  auto r = storage_->relation(triple.relation);
  auto t = storage_->entity(triple.tail);
  if (!h || !r || !t) return false;
  auto edges = storage_->out_of(*h);
  return std::binary_search(edges.begin(), edges.end(), Edge{*r, *t});
}

bool KnowledgeGraph::has_entity(std::string_view entity) const {
  return storage_->entity(entity).has_value();
}

std::size_t KnowledgeGraph::triple_count() const { return storage_->out_edges.size(); }
std::size_t KnowledgeGraph::entity_count() const { return storage_->entities.size(); }
std::size_t KnowledgeGraph::relation_count() const { return storage_->relations.size(); }

std::span<const std::string> KnowledgeGraph::relations() const { return storage_->relations; }

std::span<const std::uint64_t> KnowledgeGraph::relation_frequencies() const {
  return storage_->relation_freq;
}

std::vector<Triple> KnowledgeGraph::triples() const {
  std::vector<Triple> out;
  out.reserve(triple_count());
  const auto& s = *storage_;
  for (std::uint32_t h = 0; h < s.entities.size(); ++h) {
    for (const Edge& e : s.out_of(h))
      out.push_back({s.entities[h], s.relations[e.relation], s.entities[e.other]});
  }
  return out;
}

bool KnowledgeGraph::verify() const {
  const auto& s = *storage_;
  const std::size_t n = s.entities.size();
  if (s.out_offsets.size() != n + 1 || s.in_offsets.size() != n + 1) return false;
  if (s.out_edges.size() != s.in_edges.size()) return false;
  if (!std::is_sorted(s.entities.begin(), s.entities.end())) return false;
  if (!std::is_sorted(s.relations.begin(), s.relations.end())) return false;
  for (std::uint32_t e = 0; e < n; ++e) {
    auto out = s.out_of(e);
    auto in = s.in_of(e);
    if (std::adjacent_find(out.begin(), out.end(), std::greater_equal<>()) != out.end())
      return false;
    if (std::adjacent_find(in.begin(), in.end(), std::greater_equal<>()) != in.end())
      return false;
    for (const Edge& edge : out) {
      auto back = s.in_of(edge.other);
      if (!std::binary_search(back.begin(), back.end(), Edge{edge.relation, e})) return false;
    }
  }
  return true;
}

ToolResult execute(const KnowledgeGraph& graph, ToolVerb verb, std::string_view entity,
                   std::string_view relation, std::size_t cap) {
  std::vector<std::string_view> raw;
  switch (verb) {
    case ToolVerb::kGetTailRelations: raw = graph.tail_relations(entity); break;
    case ToolVerb::kGetHeadRelations: raw = graph.head_relations(entity); break;
    case ToolVerb::kGetTailEntities: raw = graph.tail_entities(entity, relation); break;
    case ToolVerb::kGetHeadEntities: raw = graph.head_entities(entity, relation); break;
  }
  ToolResult result;
  if (cap != 0 && raw.size() > cap) {
    raw.resize(cap);
    result.truncated = true;
  }
  result.lines.reserve(raw.size());
  for (std::string_view item : raw) {
    result.lines.emplace_back(is_entity_fetch(verb) ? graph.label_of(item) : item);
  }
  return result;
}

bool two_hop_solvable(const KnowledgeGraph& graph, std::span<const std::string> seeds,
                      std::span<const std::string> gold_labels, std::size_t max_hops) {
  if (seeds.empty()) throw UsageError("two_hop_solvable: seeds must be non-empty");
  if (max_hops == 0) throw UsageError("two_hop_solvable: max_hops must be >= 1");

  std::unordered_set<std::string> golds;
  for (const auto& label : gold_labels) {
    auto norm = normalize_answer(label);
    if (!norm.empty()) golds.insert(std::move(norm));
  }
  if (golds.empty()) return false;

  auto is_gold = [&](std::string_view e) {
    return golds.contains(normalize_answer(graph.label_of(e)));
  };

  std::unordered_set<std::string_view> seen;
  std::vector<std::string_view> frontier;
  for (const auto& s : seeds) {
    if (seen.insert(s).second) frontier.push_back(s);
  }
  for (auto e : frontier) {
    if (is_gold(e)) return true;
  }
  for (std::size_t hop = 0; hop < max_hops && !frontier.empty(); ++hop) {
    std::vector<std::string_view> next;
    auto visit = [&](std::string_view e) {
      if (!seen.insert(e).second) return false;
      next.push_back(e);
      return is_gold(e);
    };
    for (auto e : frontier) {
      for (auto r : graph.tail_relations(e))
        for (auto x : graph.tail_entities(e, r))
          if (visit(x)) return true;
      for (auto r : graph.head_relations(e))
        for (auto x : graph.head_entities(e, r))
          if (visit(x)) return true;
    }
    frontier = std::move(next);
  }
  return false;
}

}  // namespace kgtool
