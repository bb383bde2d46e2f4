// SPDX-License-Identifier: Apache-2.0
#pragma once

// File-level batch operations behind the command-line driver.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgtool/gold.hpp"
#include "kgtool/graph.hpp"
#include "kgtool/report.hpp"
#include "kgtool/trajectory.hpp"

namespace kgtool {

/// Graph from a triple TSV and an optional alias TSV. Throws UsageError when
/// a file cannot be opened, DataError on malformed rows.
KnowledgeGraph load_graph_files(const std::filesystem::path& triples,
                                const std::optional<std::filesystem::path>& aliases,
                                LoadStats* stats = nullptr);

GoldMap load_gold_file(const std::filesystem::path& path);

/// Parses every transcript in a JSON-lines dump, in file order.
std::vector<Trajectory> load_trajectories(const std::filesystem::path& path,
                                          const ParseOptions& options = {});

/// Writes trajectories as JSON-lines transcript records.
void write_trajectories(std::ostream& out, std::span<const Trajectory> trajs);

struct ScoreInputs {
  std::filesystem::path trajectories;
  std::filesystem::path gold;
  std::filesystem::path triples;
  std::optional<std::filesystem::path> aliases;
  std::string rung = "R-binary";
  /// Optional file with one qid per line for the hard-partition CvT.
  std::optional<std::filesystem::path> hard_subset;
  std::size_t threads = 0;
  double confidence = 0.95;
};

/// Parse, score, classify and aggregate. Throws UsageError on an unknown rung
/// or unreadable file, DataError on malformed rows or an unresolved qid.
ScoredRun score_file(const ScoreInputs& inputs);

/// One scored JSON line per record, in input order.
void write_scored(std::ostream& out, std::span<const ScoredRecord> records);
std::vector<ScoredRecord> read_scored(std::istream& in);
std::vector<ScoredRecord> read_scored_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
/// Writes `text` to `path`, or to stdout when the path is "-".
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace kgtool
