// SPDX-License-Identifier: Apache-2.0
#pragma once

// Seeded synthetic knowledge graphs with matching gold question sets, plus the
// small hand-written reference graph used throughout the tests.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "kgtool/gold.hpp"
#include "kgtool/graph.hpp"

namespace kgtool {

struct SynthOptions {
  std::size_t questions = 100;
  std::size_t min_hops = 1;
  std::size_t max_hops = 2;
  /// Extra out-edges per chain head, each under a relation other than the
  /// hop's gold relation.
  std::size_t distractors = 2;
  /// Probability that a hop's gold relation also leads to one extra sibling.
  double sibling_rate = 0.3;
  /// Size of the relation vocabulary to draw from (capped by what the
  /// built-in name parts can produce).
  std::size_t relation_vocab = 40;
  std::uint64_t seed = 1;
};

struct SyntheticWorld {
  std::vector<Triple> triples;
  std::vector<KnowledgeGraph::Alias> aliases;
  std::vector<GoldRecord> golds;
  KnowledgeGraph graph;
};

/// Every entity gets a unique label of two five-letter tokens, so one label
/// occurring inside another implies the two are equal. Every gold chain is
/// present in the graph. Same options, same world.
SyntheticWorld make_synthetic_world(const SynthOptions& options);

/// The seven-triple reference graph: a religion chain from m.01, a film chain
/// from m.04, and a second film sharing a director.
std::vector<Triple> reference_triples();
std::vector<KnowledgeGraph::Alias> reference_aliases();
KnowledgeGraph reference_graph();

/// The reference graph merged with a synthetic world built from `options`.
SyntheticWorld extended_reference_world(const SynthOptions& options);

/// Writes triples.tsv, aliases.tsv and gold.jsonl into `dir` (created if
/// missing).
void write_world(const SyntheticWorld& world, const std::filesystem::path& dir);

}  // namespace kgtool
