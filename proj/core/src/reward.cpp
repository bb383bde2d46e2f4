// SPDX-License-Identifier: Apache-2.0
#include "kgtool/reward.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "kgtool/error.hpp"
#include "kgtool/text.hpp"

namespace kgtool {

namespace {

constexpr std::array<std::string_view, 10> kComponentNames = {
    "r_em", "r_f1", "r_out", "r_valid", "r_path",
    "r_coh", "r_tool_type", "r_tool_usage", "r_retrv", "r_ans"};

void require_golds(std::span<const std::string> golds) {
  if (golds.empty()) throw UsageError("empty gold answer list");
}

double fraction(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double token_f1(std::string_view prediction, std::string_view gold) {
  auto pred = split_whitespace(prediction);
  auto ref = split_whitespace(gold);
  if (pred.empty() || ref.empty()) return 0.0;
  std::unordered_map<std::string_view, std::size_t> counts;
  for (auto t : ref) ++counts[t];
  std::size_t overlap = 0;
  for (auto t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = fraction(overlap, pred.size());
  const double recall = fraction(overlap, ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<Rung> build_ladder() {
  const std::vector<std::pair<Component, double>> binary = {{Component::kEm, 0.5},
                                                            {Component::kF1, 0.5}};
  const std::vector<std::pair<Component, double>> stepwise = {{Component::kOut, 0.25},
                                                              {Component::kValid, 0.25},
                                                              {Component::kPath, 0.25},
                                                              {Component::kCoh, 0.25}};
  const std::vector<std::pair<Component, double>> toolverbs = {{Component::kOut, 0.25},
                                                               {Component::kToolType, 0.50},
                                                               {Component::kToolUsage, 0.25}};
  const std::vector<std::pair<Component, double>> selfv = {{Component::kAns, 0.25},
                                                           {Component::kToolType, 0.50},
                                                           {Component::kRetrv, 0.25}};
  return {
      {"R-binary", binary},
      {"R-binary-SR", binary},
      {"R-stepwise", stepwise},
      {"R-toolverbs", toolverbs},
      {"R-toolverbs·KL", toolverbs},
      {"R-selfV", selfv},
  };
}

}  // namespace

std::string_view component_name(Component c) { return kComponentNames[static_cast<std::size_t>(c)]; }

double r_em(std::string_view answer, std::span<const std::string> golds) {
  require_golds(golds);
  return std::any_of(golds.begin(), golds.end(), [&](const std::string& g) { return g == answer; })
             ? 1.0
             : 0.0;
}

double r_f1(std::string_view answer, std::span<const std::string> golds) {
  require_golds(golds);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, token_f1(answer, g));
  return best;
}

double r_out(std::string_view answer, std::span<const std::string> golds) {
  return 0.5 * r_em(answer, golds) + 0.5 * r_f1(answer, golds);
}

double lenient_match(std::string_view answer, std::span<const std::string> golds) {
  require_golds(golds);
  auto answer_tokens = split_whitespace(answer);
  std::set<std::string_view> present(answer_tokens.begin(), answer_tokens.end());
  double best = 0.0;
  for (const auto& g : golds) {
    auto gold_tokens = split_whitespace(g);
    std::size_t hit = 0;
    for (auto t : gold_tokens) hit += present.contains(t) ? 1 : 0;
    best = std::max(best, fraction(hit, gold_tokens.size()));
  }
  return best;
}

double r_ans(std::string_view answer, std::span<const std::string> golds) {
  return 0.5 * lenient_match(answer, golds) + 0.5 * r_f1(answer, golds);
}

double r_valid(const Trajectory& traj) {
  std::size_t ok = 0;
  std::size_t total = 0;
  for (const auto* call : traj.calls()) {
    ++total;
    ok += call->parse_ok ? 1 : 0;
  }
  return fraction(ok, total);
}

double r_path(const Trajectory& traj, const GoldRecord& gold) {
  const auto relations = gold.chain_relations();
  for (const auto* call : traj.calls()) {
    if (!call->parse_ok || !call->relation) continue;
    if (std::find(relations.begin(), relations.end(), *call->relation) != relations.end())
      return 1.0;
  }
  return 0.0;
}

std::vector<std::string> coherence_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ',') {
      flush();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  flush();
  return tokens;
}

double lcs_ratio(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() && b.empty()) return 0.0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return 2.0 * static_cast<double>(prev[b.size()]) / static_cast<double>(a.size() + b.size());
}

double r_coh(const Trajectory& traj) {
  double sum = 0.0;
  std::size_t turns = 0;
  for (const auto& turn : traj.turns) {
    if (!turn.think || !turn.call) continue;
    sum += lcs_ratio(coherence_tokens(*turn.think), coherence_tokens(turn.call->raw_text));
    ++turns;
  }
  return turns == 0 ? 0.0 : sum / static_cast<double>(turns);
}

double r_tool_type(const Trajectory& traj) {
  std::set<ToolVerb> verbs;
  for (const auto* call : traj.calls()) {
    if (call->parse_ok && call->verb) verbs.insert(*call->verb);
  }
  return fraction(verbs.size(), kAllVerbs.size());
}

double r_tool_usage(const Trajectory& traj) {
  std::size_t nonempty = 0;
  std::size_t total = 0;
  for (const auto& turn : traj.turns) {
    if (!turn.call) continue;
    ++total;
    nonempty += turn.has_nonempty_response() ? 1 : 0;
  }
  return fraction(nonempty, total);
}

bool productive(const Turn& turn, std::string_view normalized_answer) {
  if (!turn.call || !turn.has_nonempty_response() || normalized_answer.empty()) return false;
  return std::any_of(turn.response->begin(), turn.response->end(), [&](const std::string& line) {
    return contains_nonempty(normalized_answer, normalize_answer(line));
  });
}

double r_retrv(const Trajectory& traj) {
  const std::string answer = normalize_answer(traj.final_answer_raw.value_or(""));
  std::size_t prod = 0;
  std::size_t total = 0;
  for (const auto& turn : traj.turns) {
    if (!turn.call) continue;
    ++total;
    prod += productive(turn, answer) ? 1 : 0;
  }
  return fraction(prod, total);
}

const std::vector<Rung>& ladder() {
  static const std::vector<Rung> rungs = build_ladder();
  return rungs;
}

const Rung& find_rung(std::string_view name) {
  std::string canonical(name);
  if (name == "R-toolverbs-KL" || name == "R-toolverbs.KL") canonical = "R-toolverbs·KL";
  for (const auto& rung : ladder()) {
    if (rung.name == canonical) return rung;
  }
  throw UsageError("unknown reward rung '" + std::string(name) + "'");
}

double component_value(Component c, const Trajectory& traj, const GoldRecord& gold) {
  const std::string answer = normalize_answer(traj.final_answer_raw.value_or(""));
  switch (c) {
    case Component::kEm: return r_em(answer, gold.answers);
    case Component::kF1: return r_f1(answer, gold.answers);
    case Component::kOut: return r_out(answer, gold.answers);
    case Component::kValid: return r_valid(traj);
    case Component::kPath: return r_path(traj, gold);
    case Component::kCoh: return r_coh(traj);
    case Component::kToolType: return r_tool_type(traj);
    case Component::kToolUsage: return r_tool_usage(traj);
    case Component::kRetrv: return r_retrv(traj);
    case Component::kAns: return r_ans(answer, gold.answers);
  }
  return 0.0;
}

RewardBreakdown score(const Rung& rung, const Trajectory& traj, const GoldRecord& gold) {
  RewardBreakdown out;
  out.rung = rung.name;
  for (const auto& [component, weight] : rung.weights) {
    const double value = component_value(component, traj, gold);
    const std::string name(component_name(component));
    out.components[name] = value;
    out.weighted[name] = weight * value;
    out.total += weight * value;
  }
  return out;
}

RewardBreakdown score(std::string_view rung_name, const Trajectory& traj, const GoldRecord& gold) {
  return score(find_rung(rung_name), traj, gold);
}

std::string to_json(const RewardBreakdown& breakdown) {
  nlohmann::json j = {{"rung", breakdown.rung},
                      {"components", breakdown.components},
                      {"weighted", breakdown.weighted},
                      {"total", breakdown.total}};
  return j.dump();
}

}  // namespace kgtool
