// SPDX-License-Identifier: Apache-2.0
#include "kgtool/pipeline.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "kgtool/error.hpp"
#include "kgtool/reward.hpp"
#include "kgtool/text.hpp"

namespace kgtool {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  return in;
}

std::string with_file(const std::filesystem::path& path, const std::string& what) {
  return path.string() + ": " + what;
}

}  // namespace

KnowledgeGraph load_graph_files(const std::filesystem::path& triples,
                                const std::optional<std::filesystem::path>& aliases,
                                LoadStats* stats) {
  auto in = open_input(triples);
  std::optional<std::ifstream> alias_in;
  if (aliases) alias_in = open_input(*aliases);
  return KnowledgeGraph::load(in, alias_in ? &*alias_in : nullptr, stats);
}

GoldMap load_gold_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return index_gold(read_gold(in));
  } catch (const DataError& e) {
    throw DataError(with_file(path, e.what()));
  }
}

std::vector<Trajectory> load_trajectories(const std::filesystem::path& path,
                                          const ParseOptions& options) {
  auto in = open_input(path);
  std::vector<TranscriptRecord> records;
  try {
    records = read_transcripts(in);
  } catch (const DataError& e) {
    throw DataError(with_file(path, e.what()));
  }
  std::vector<Trajectory> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    Trajectory t = parse_transcript(r.transcript, options);
    t.question_id = r.qid;
    out.push_back(std::move(t));
  }
  return out;
}

void write_trajectories(std::ostream& out, std::span<const Trajectory> trajs) {
  for (const auto& t : trajs) write_transcript(out, {t.question_id, render_transcript(t)});
}

ScoredRun score_file(const ScoreInputs& inputs) {
  const Rung& rung = find_rung(inputs.rung);
  const GoldMap golds = load_gold_file(inputs.gold);
  const KnowledgeGraph graph = load_graph_files(inputs.triples, inputs.aliases);
  const auto trajs = load_trajectories(inputs.trajectories);

  std::set<std::string, std::less<>> hard;
  ReportOptions options;
  options.threads = inputs.threads;
  options.confidence = inputs.confidence;
  if (inputs.hard_subset) {
    auto in = open_input(*inputs.hard_subset);
    std::string line;
    while (std::getline(in, line)) {
      auto qid = trim(line);
      if (!qid.empty()) hard.emplace(qid);
    }
    options.hard_subset = &hard;
  }
  return run_report(trajs, golds, graph, rung, options);
}

void write_scored(std::ostream& out, std::span<const ScoredRecord> records) {
  for (const auto& r : records) out << to_json(r) << '\n';
}

std::vector<ScoredRecord> read_scored(std::istream& in) {
  std::vector<ScoredRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(scored_record_from_json(line));
    } catch (const DataError& e) {
      throw DataError(e.what(), line_no);
    }
  }
  return out;
}

std::vector<ScoredRecord> read_scored_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_scored(in);
  } catch (const DataError& e) {
    throw DataError(with_file(path, e.what()));
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

}  // namespace kgtool
