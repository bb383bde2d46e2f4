// SPDX-License-Identifier: Apache-2.0
#include "kgtool/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "kgtool/error.hpp"
#include "kgtool/parallel.hpp"
#include "kgtool/text.hpp"

namespace kgtool {

namespace {

using nlohmann::json;

double rate(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

bool contained_em(const Trajectory& traj, const GoldRecord& gold) {
  if (!traj.final_answer_raw) return false;
  const std::string answer = normalize_answer(*traj.final_answer_raw);
  return std::any_of(gold.answers.begin(), gold.answers.end(),
                     [&](const std::string& g) { return contains_nonempty(answer, g); });
}

json interval_json(const Interval& ci) { return json::array({ci.low, ci.high}); }

Interval interval_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json call_json(const ToolCall& call) {
  json j = {{"raw", call.raw_text}, {"parse_ok", call.parse_ok}};
  j["verb"] = call.verb ? json(std::string(verb_name(*call.verb))) : json(nullptr);
  j["entity"] = call.entity;
  j["relation"] = call.relation ? json(*call.relation) : json(nullptr);
  return j;
}

ToolCall call_from(const json& j) {
  ToolCall call;
  call.raw_text = j.at("raw").get<std::string>();
  call.parse_ok = j.at("parse_ok").get<bool>();
  if (!j.at("verb").is_null()) call.verb = parse_verb(j.at("verb").get<std::string>());
  call.entity = j.at("entity").get<std::string>();
  if (!j.at("relation").is_null()) call.relation = j.at("relation").get<std::string>();
  return call;
}

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, value);
  return buf;
}

}  // namespace

ScoredRecord score_one(const Trajectory& traj, const GoldRecord& gold, const KnowledgeGraph& graph,
                       const Rung& rung) {
  ScoredRecord rec;
  rec.qid = traj.question_id;
  rec.category = classify(traj, gold, graph);
  rec.em = normalized_em(traj, gold);
  rec.strict_em = strict_em(traj, gold);
  rec.contem = contained_em(traj, gold);
  rec.flags = traj.flags;
  rec.breakdown = score(rung, traj, gold);
  for (const auto* call : traj.calls()) {
    ++rec.calls;
    if (!call->parse_ok) {
      ++rec.malformed_calls;
    } else if (call->verb) {
      ++rec.verb_calls[static_cast<std::size_t>(*call->verb)];
    }
  }
  if (const auto* first = traj.first_call()) rec.first_call = *first;
  return rec;
}

RunReport aggregate(std::span<const ScoredRecord> records, std::string_view rung,
                    const ReportOptions& options) {
  if (records.empty()) throw UsageError("cannot report on an empty run");
  RunReport r;
  r.n = records.size();
  r.rung = std::string(rung);
  r.confidence = options.confidence;
  std::size_t hard_n = 0;
  std::size_t hard_cvt = 0;
  for (const auto& rec : records) {
    r.em_count += rec.em ? 1 : 0;
    r.contem_count += rec.contem ? 1 : 0;
    r.strict_em_errors += rec.strict_em ? 0 : 1;
    ++r.category_histogram[static_cast<std::size_t>(rec.category)];
    r.total_calls += rec.calls;
    r.malformed_calls += rec.malformed_calls;
    for (std::size_t v = 0; v < r.verb_calls.size(); ++v) r.verb_calls[v] += rec.verb_calls[v];
    for (const auto& [name, value] : rec.breakdown.components) r.mean_components[name] += value;
    for (const auto& [name, value] : rec.breakdown.weighted) r.mean_weighted[name] += value;
    r.mean_total += rec.breakdown.total;
    if (options.hard_subset && options.hard_subset->contains(rec.qid)) {
      ++hard_n;
      hard_cvt += rec.category == Category::kCorrectViaTool ? 1 : 0;
    }
  }
  const double n = static_cast<double>(r.n);
  for (auto& [name, value] : r.mean_components) value /= n;
  for (auto& [name, value] : r.mean_weighted) value /= n;
  r.mean_total /= n;

  r.cvt_count = r.count(Category::kCorrectViaTool);
  r.em_rate = rate(r.em_count, r.n);
  r.contem_rate = rate(r.contem_count, r.n);
  r.cvt_rate = rate(r.cvt_count, r.n);
  r.tools_per_q = rate(r.total_calls, r.n);
  r.em_ci = wilson_ci(r.em_count, r.n, options.confidence);
  r.contem_ci = wilson_ci(r.contem_count, r.n, options.confidence);
  r.cvt_ci = wilson_ci(r.cvt_count, r.n, options.confidence);
  if (options.hard_subset) {
    r.hard_n = hard_n;
    r.hard_cvt_count = hard_cvt;
  }
  return r;
}

ScoredRun run_report(std::span<const Trajectory> trajectories, const GoldMap& golds,
                     const KnowledgeGraph& graph, const Rung& rung, const ReportOptions& options) {
  if (trajectories.empty()) throw UsageError("cannot report on an empty run");
  std::vector<const GoldRecord*> resolved(trajectories.size());
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    auto it = golds.find(trajectories[i].question_id);
    if (it == golds.end())
      throw DataError("no gold record for qid '" + trajectories[i].question_id + "'");
    resolved[i] = &it->second;
  }
  ScoredRun run;
  run.records.resize(trajectories.size());
  parallel_for(trajectories.size(), options.threads, [&](std::size_t i) {
    run.records[i] = score_one(trajectories[i], *resolved[i], graph, rung);
  });
  run.report = aggregate(run.records, rung.name, options);
  return run;
}

std::string to_json(const ScoredRecord& record) {
  json flags = json::array();
  for (auto name : record.flags.names()) flags.push_back(std::string(name));
  json verbs = json::object();
  for (auto verb : kAllVerbs)
    verbs[std::string(verb_name(verb))] = record.verb_calls[static_cast<std::size_t>(verb)];
  json j = {
      {"qid", record.qid},
      {"category", std::string(category_name(record.category))},
      {"em", record.em},
      {"strict_em", record.strict_em},
      {"contem", record.contem},
      {"calls", record.calls},
      {"malformed_calls", record.malformed_calls},
      {"verb_calls", verbs},
      {"flags", flags},
      {"breakdown", json::parse(to_json(record.breakdown))},
  };
  j["first_call"] = record.first_call ? call_json(*record.first_call) : json(nullptr);
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

ScoredRecord scored_record_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    ScoredRecord rec;
    rec.qid = j.at("qid").get<std::string>();
    auto category = parse_category(j.at("category").get<std::string>());
    if (!category) throw DataError("unknown category in scored record");
    rec.category = *category;
    rec.em = j.at("em").get<bool>();
    rec.strict_em = j.at("strict_em").get<bool>();
    rec.contem = j.at("contem").get<bool>();
    rec.calls = j.at("calls").get<std::size_t>();
    rec.malformed_calls = j.value("malformed_calls", std::size_t{0});
    if (j.contains("verb_calls")) {
      for (auto verb : kAllVerbs)
        rec.verb_calls[static_cast<std::size_t>(verb)] =
            j["verb_calls"].value(std::string(verb_name(verb)), std::size_t{0});
    }
    for (const auto& name : j.at("flags")) {
      for (std::size_t f = 0; f < 5; ++f) {
        if (flag_name(static_cast<FormatFlag>(f)) == name.get<std::string>())
          rec.flags.set(static_cast<FormatFlag>(f));
      }
    }
    const auto& b = j.at("breakdown");
    rec.breakdown.rung = b.at("rung").get<std::string>();
    rec.breakdown.components = b.at("components").get<std::map<std::string, double>>();
    rec.breakdown.weighted = b.at("weighted").get<std::map<std::string, double>>();
    rec.breakdown.total = b.at("total").get<double>();
    if (!j.at("first_call").is_null()) rec.first_call = call_from(j["first_call"]);
    return rec;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed scored record: ") + e.what());
  }
}

std::string to_json(const RunReport& r) {
  json hist = json::object();
  for (auto c : kAllCategories) hist[std::string(category_name(c))] = r.count(c);
  json verbs = json::object();
  for (auto v : kAllVerbs) verbs[std::string(verb_name(v))] = r.verb_calls[static_cast<std::size_t>(v)];
  json j = {
      {"n", r.n},
      {"em_count", r.em_count},
      {"em_rate", r.em_rate},
      {"em_ci", interval_json(r.em_ci)},
      {"contem_count", r.contem_count},
      {"contem_rate", r.contem_rate},
      {"contem_ci", interval_json(r.contem_ci)},
      {"cvt_count", r.cvt_count},
      {"cvt_rate", r.cvt_rate},
      {"cvt_ci", interval_json(r.cvt_ci)},
      {"strict_em_errors", r.strict_em_errors},
      {"tools_per_q", r.tools_per_q},
      {"total_calls", r.total_calls},
      {"malformed_calls", r.malformed_calls},
      {"verb_calls", verbs},
      {"confidence", r.confidence},
      {"category_histogram", hist},
      {"rung", r.rung},
      {"mean_components", r.mean_components},
      {"mean_weighted", r.mean_weighted},
      {"mean_total", r.mean_total},
  };
  if (r.hard_n) {
    j["hard_partition"] = {{"n", *r.hard_n}, {"cvt_count", *r.hard_cvt_count}};
  }
  return j.dump(2);
}

RunReport report_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    RunReport r;
    r.n = j.at("n").get<std::size_t>();
    r.em_count = j.at("em_count").get<std::size_t>();
    r.em_rate = j.at("em_rate").get<double>();
    r.em_ci = interval_from(j.at("em_ci"));
    r.contem_count = j.at("contem_count").get<std::size_t>();
    r.contem_rate = j.at("contem_rate").get<double>();
    r.contem_ci = interval_from(j.at("contem_ci"));
    r.cvt_count = j.at("cvt_count").get<std::size_t>();
    r.cvt_rate = j.at("cvt_rate").get<double>();
    r.cvt_ci = interval_from(j.at("cvt_ci"));
    r.strict_em_errors = j.at("strict_em_errors").get<std::size_t>();
    r.tools_per_q = j.at("tools_per_q").get<double>();
    r.total_calls = j.at("total_calls").get<std::size_t>();
    r.malformed_calls = j.value("malformed_calls", std::size_t{0});
    r.confidence = j.value("confidence", 0.95);
    for (auto v : kAllVerbs)
      r.verb_calls[static_cast<std::size_t>(v)] =
          j.at("verb_calls").value(std::string(verb_name(v)), std::size_t{0});
    for (auto c : kAllCategories)
      r.category_histogram[static_cast<std::size_t>(c)] =
          j.at("category_histogram").value(std::string(category_name(c)), std::size_t{0});
    r.rung = j.at("rung").get<std::string>();
    r.mean_components = j.at("mean_components").get<std::map<std::string, double>>();
    r.mean_weighted = j.at("mean_weighted").get<std::map<std::string, double>>();
    r.mean_total = j.at("mean_total").get<double>();
    if (j.contains("hard_partition")) {
      r.hard_n = j["hard_partition"].at("n").get<std::size_t>();
      r.hard_cvt_count = j["hard_partition"].at("cvt_count").get<std::size_t>();
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report JSON: ") + e.what());
  }
}

std::string format_table(std::span<const std::pair<std::string, RunReport>> rows) {
  const std::vector<std::string> header = {"Step", "EM", "CvT count", "CvT %", "Wilson 95% CI",
                                           "Tools/Q"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& [step, r] : rows) {
    cells.push_back({
        step,
        fmt("%.3f", r.em_rate),
        std::to_string(r.cvt_count) + " / " + std::to_string(r.n),
        fmt("%.2f%%", 100.0 * r.cvt_rate),
        fmt("[%.2f, ", 100.0 * r.cvt_ci.low) + fmt("%.2f]", 100.0 * r.cvt_ci.high),
        fmt("%.2f", r.tools_per_q),
    });
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << "  ";
      const std::size_t pad = width[c] - row[c].size();
      if (c == 0) {
        out << row[c] << std::string(pad, ' ');
      } else {
        out << std::string(pad, ' ') << row[c];
      }
    }
    out << '\n';
  };
  emit(header);
  std::size_t total = 2 * (header.size() - 1);
  for (auto w : width) total += w;
  out << std::string(total, '-') << '\n';
  for (const auto& row : cells) emit(row);
  return out.str();
}

std::string format_histogram(const RunReport& report) {
  std::ostringstream out;
  for (auto c : kAllCategories) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-20s %8zu  %6.2f%%\n", std::string(category_name(c)).c_str(),
                  report.count(c), 100.0 * rate(report.count(c), report.n));
    out << buf;
  }
  return out.str();
}

}  // namespace kgtool
