// SPDX-License-Identifier: Apache-2.0
#include "kgtool/gold.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "kgtool/error.hpp"
#include "kgtool/text.hpp"

namespace kgtool {

namespace {

std::vector<std::string> string_array(const nlohmann::json& row, const char* key,
                                      std::size_t line_no, bool required) {
  if (!row.contains(key)) {
    if (required) throw DataError(std::string("gold row missing \"") + key + "\"", line_no);
    return {};
  }
  const auto& value = row[key];
  if (!value.is_array()) throw DataError(std::string("\"") + key + "\" must be an array", line_no);
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string())
      throw DataError(std::string("\"") + key + "\" entries must be strings", line_no);
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<std::string> GoldRecord::chain_relations() const {
  std::vector<std::string> out;
  out.reserve(chain.size());
  for (const auto& t : chain) out.push_back(t.relation);
  return out;
}

std::vector<std::string> GoldRecord::chain_entities() const {
  std::vector<std::string> out;
  for (const auto& t : chain) {
    for (const auto* e : {&t.head, &t.tail}) {
      if (std::find(out.begin(), out.end(), *e) == out.end()) out.push_back(*e);
    }
  }
  return out;
}

GoldRecord make_gold(std::string qid, std::string question, std::vector<std::string> answers,
                     std::vector<Triple> chain, std::vector<std::string> seeds) {
  if (answers.empty()) throw UsageError("gold record " + qid + " has no answers");
  GoldRecord gold;
  gold.qid = std::move(qid);
  gold.question = std::move(question);
  gold.answers_raw = std::move(answers);
  for (const auto& a : gold.answers_raw) gold.answers.push_back(normalize_answer(a));
  gold.chain = std::move(chain);
  gold.seeds = std::move(seeds);
  return gold;
}

std::vector<GoldRecord> read_gold(std::istream& in) {
  std::vector<GoldRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!row.is_object()) throw DataError("gold row must be a JSON object", line_no);
    if (!row.contains("qid") || !row["qid"].is_string())
      throw DataError("gold row needs a string \"qid\"", line_no);
    std::string question;
    if (row.contains("question")) {
      if (!row["question"].is_string()) throw DataError("\"question\" must be a string", line_no);
      question = row["question"].get<std::string>();
    }
    auto answers = string_array(row, "answers", line_no, true);
    if (answers.empty()) throw DataError("gold row has an empty answer list", line_no);
    auto seeds = string_array(row, "seeds", line_no, false);

    std::vector<Triple> chain;
    if (row.contains("chain")) {
      if (!row["chain"].is_array()) throw DataError("\"chain\" must be an array", line_no);
      for (const auto& hop : row["chain"]) {
        if (!hop.is_array() || hop.size() != 3 ||
            !std::all_of(hop.begin(), hop.end(), [](const auto& x) { return x.is_string(); }))
          throw DataError("chain hops must be [head, relation, tail] string triples", line_no);
        chain.push_back({hop[0].get<std::string>(), hop[1].get<std::string>(),
                         hop[2].get<std::string>()});
      }
    }
    records.push_back(make_gold(row["qid"].get<std::string>(), std::move(question),
                                std::move(answers), std::move(chain), std::move(seeds)));
  }
  return records;
}

GoldMap index_gold(std::vector<GoldRecord> records) {
  GoldMap map;
  for (auto& r : records) {
    std::string qid = r.qid;
    if (!map.emplace(qid, std::move(r)).second) throw DataError("duplicate gold qid " + qid);
  }
  return map;
}

void write_gold(std::ostream& out, const GoldRecord& record) {
  nlohmann::json chain = nlohmann::json::array();
  for (const auto& t : record.chain) chain.push_back({t.head, t.relation, t.tail});
  nlohmann::json row = {{"qid", record.qid},
                        {"question", record.question},
                        {"answers", record.answers_raw},
                        {"chain", chain},
                        {"seeds", record.seeds}};
  out << row.dump() << '\n';
}

}  // namespace kgtool
