// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "kgtool/graph.hpp"

namespace kgtool {

/// One annotated question: accepted answers, the gold triple chain from the
/// seed entity to the answer, and the seed entities themselves.
struct GoldRecord {
  std::string qid;
  std::string question;
  /// Answers as written in the gold file.
  std::vector<std::string> answers_raw;
  /// normalize_answer() of each raw answer, same order.
  std::vector<std::string> answers;
  std::vector<Triple> chain;
  std::vector<std::string> seeds;

  /// Relation names along the chain, in hop order.
  std::vector<std::string> chain_relations() const;
  /// Entity ids appearing anywhere on the chain (heads and tails, deduplicated).
  std::vector<std::string> chain_entities() const;
};

/// Builds a record and fills `answers` from `answers_raw`. Throws UsageError
/// when the answer list is empty.
GoldRecord make_gold(std::string qid, std::string question, std::vector<std::string> answers,
                     std::vector<Triple> chain, std::vector<std::string> seeds);

using GoldMap = std::map<std::string, GoldRecord, std::less<>>;

/// Reads JSON-lines gold records. Throws DataError with the line number on a
/// malformed row or an empty answer list.
std::vector<GoldRecord> read_gold(std::istream& in);
/// Throws DataError on a repeated qid.
GoldMap index_gold(std::vector<GoldRecord> records);
void write_gold(std::ostream& out, const GoldRecord& record);

}  // namespace kgtool
