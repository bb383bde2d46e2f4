// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shared fixtures for the test binaries.

#include <string>
#include <vector>

#include "kgtool/gold.hpp"
#include "kgtool/graph.hpp"
#include "kgtool/trajectory.hpp"

namespace kgtool::testing {

// The seven-triple fixture, spelled out here rather than taken from the
// library so that tests can check the library copy against it.
inline std::vector<Triple> g0_triples() {
  return {
      {"m.01", "people.person.religion", "m.02"},
      {"m.01", "people.person.place_of_birth", "m.03"},
      {"m.02", "religion.religion.founders", "m.06"},
      {"m.04", "film.actor.film", "m.05"},
      {"m.05", "film.film.directed_by", "m.07"},
      {"m.04", "people.person.nationality", "m.08"},
      {"m.09", "film.film.directed_by", "m.07"},
  };
}

inline std::vector<KnowledgeGraph::Alias> g0_aliases() {
  return {{"m.01", "ovadia yosef"},   {"m.02", "judaism"},       {"m.03", "jerusalem"},
          {"m.04", "audrey hepburn"}, {"m.05", "roman holiday"}, {"m.06", "abraham"},
          {"m.07", "william wyler"},  {"m.08", "united kingdom"}, {"m.09", "ben-hur"}};
}

inline KnowledgeGraph g0() {
  const auto t = g0_triples();
  const auto a = g0_aliases();
  return KnowledgeGraph::from_triples(t, a);
}

inline GoldRecord religion_gold() {
  return make_gold("q-religion", "what religion is ovadia yosef", {"judaism"},
                   {{"m.01", "people.person.religion", "m.02"}}, {"m.01"});
}

inline GoldRecord director_gold() {
  return make_gold("q-director", "who directed the film audrey hepburn starred in",
                   {"william wyler"},
                   {{"m.04", "film.actor.film", "m.05"}, {"m.05", "film.film.directed_by", "m.07"}},
                   {"m.04"});
}

inline Trajectory parse(const std::string& text, const std::string& qid = "q") {
  Trajectory t = parse_transcript(text);
  t.question_id = qid;
  return t;
}

// "<search>call</search><tool_response>lines</tool_response>"
inline std::string step(const std::string& call, const std::vector<std::string>& lines) {
  std::string out = "<search>" + call + "</search><tool_response>";
  for (const auto& l : lines) out += l + "\n";
  return out + "</tool_response>";
}

inline std::string answer(const std::string& a) { return "<answer>" + a + "</answer>"; }

}  // namespace kgtool::testing
