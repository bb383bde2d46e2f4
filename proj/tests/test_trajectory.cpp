// SPDX-License-Identifier: Apache-2.0
#include <random>
#include <sstream>

#include "doctest.h"
#include "kgtool/error.hpp"
#include "kgtool/policy.hpp"
#include "kgtool/synth.hpp"
#include "kgtool/text.hpp"
#include "kgtool/trajectory.hpp"
#include "support.hpp"

using namespace kgtool;
using kgtool::testing::answer;
using kgtool::testing::step;

namespace {

std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  static const std::vector<std::string> pieces = {
      "<think>", "</think>", "<search>", "</search>", "<tool_response>", "</tool_response>",
      "<answer>", "</answer>", "get_tail_relations(m.01)", "get_tail_entities(m.01, r.x)", "(",
      ")", ",", " ", "\n", "The", "a", "an", "the", "Judaism", ".", "-", "\xc3\x89", "\xe2\x80\x94",
      "\xff", "\xc3", "<", ">", "x", "t.he", "\t"};
  std::string out;
  const std::size_t n = rng() % max_len;
  for (std::size_t i = 0; i < n; ++i) out += pieces[rng() % pieces.size()];
  return out;
}

// Independent scan for a search open tag inside a closed think span, using
// the same flat first-match rule as the grammar.
bool oracle_search_inside_think(const std::string& text) {
  static const std::vector<std::pair<std::string, std::string>> tags = {
      {"<think>", "</think>"}, {"<search>", "</search>"},
      {"<tool_response>", "</tool_response>"}, {"<answer>", "</answer>"}};
  std::size_t pos = 0;
  while (true) {
    std::size_t best = std::string::npos;
    std::size_t which = 0;
    for (std::size_t k = 0; k < tags.size(); ++k) {
      auto at = text.find(tags[k].first, pos);
      if (at < best) {
        best = at;
        which = k;
      }
    }
    if (best == std::string::npos) return false;
    const auto body = best + tags[which].first.size();
    const auto close = text.find(tags[which].second, body);
    if (close == std::string::npos) {
      if (which == 1) return false;
      pos = body;
      continue;
    }
    if (which == 0 && text.substr(body, close - body).find("<search>") != std::string::npos) return true;
    pos = close + tags[which].second.size();
  }
}

}  // namespace

TEST_CASE("normalize_answer examples") {
  CHECK(normalize_answer("The Judaism.") == "judaism");
  CHECK(normalize_answer("  William  Wyler ") == "william wyler");
  CHECK(normalize_answer("") == "");
  CHECK(normalize_answer("Ben-Hur") == "benhur");
  CHECK(normalize_answer("a man, a plan, an island") == "man plan island");
  CHECK(normalize_answer("Theodore") == "theodore");
  CHECK(normalize_answer("\xc3\x89MILE \xe2\x80\x94 Zola") == "\xc3\xa9mile zola");
  CHECK(normalize_answer("t.he cat") == "cat");
}

TEST_CASE("normalize_answer is idempotent") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 3000; ++i) {
    const auto x = random_text(rng, 20);
    const auto once = normalize_answer(x);
    CHECK(normalize_answer(once) == once);
  }
}

TEST_CASE("parse_call examples") {
  auto c = parse_call("get_tail_entities(m.01, people.person.religion)");
  CHECK(c.parse_ok);
  CHECK(c.verb == ToolVerb::kGetTailEntities);
  CHECK(c.entity == "m.01");
  CHECK(c.relation == "people.person.religion");

  c = parse_call("get_tail_entities(m.01)");
  CHECK_FALSE(c.parse_ok);
  CHECK(c.verb == ToolVerb::kGetTailEntities);
  CHECK_FALSE(c.relation.has_value());

  c = parse_call("lookup(m.01)");
  CHECK_FALSE(c.parse_ok);
  CHECK_FALSE(c.verb.has_value());
  CHECK(c.raw_text == "lookup(m.01)");

  CHECK(parse_call("  get_head_relations (  m.07 ) ").parse_ok);
  CHECK_FALSE(parse_call("get_tail_relations(m.01, r)").parse_ok);
  CHECK_FALSE(parse_call("get_tail_relations()").parse_ok);
  CHECK_FALSE(parse_call("get_tail_entities(m.01, )").parse_ok);
  CHECK_FALSE(parse_call("get_tail_relations(f(m.01))").parse_ok);
  CHECK_FALSE(parse_call("").parse_ok);
  CHECK_FALSE(parse_call(")").parse_ok);
}

TEST_CASE("parse_transcript examples") {
  auto t = parse_transcript(
      "<search>get_tail_relations(m.01)</search><tool_response>people.person.religion"
      "</tool_response><answer>judaism</answer>");
  REQUIRE(t.turns.size() == 1);
  CHECK(t.turns[0].call->parse_ok);
  CHECK(*t.turns[0].response == std::vector<std::string>{"people.person.religion"});
  CHECK(t.final_answer_raw == "judaism");
  CHECK(t.flags.empty());

  t = parse_transcript("<think>let me <search>get_tail_relations(m.01)</search> now</think>");
  CHECK(t.flags.test(FormatFlag::kSearchInsideThink));
  CHECK(t.call_count() == 0);

  t = parse_transcript("no tags at all");
  CHECK(t.turns.empty());
  CHECK(t.flags.test(FormatFlag::kMissingAnswerEnvelope));
  CHECK(t.flags.names() == std::vector<std::string_view>{"missing_answer_envelope"});
}

TEST_CASE("transcript structure details") {
  SUBCASE("last answer wins") {
    auto t = parse_transcript("<answer>x</answer><answer> judaism </answer>");
    CHECK(t.final_answer_raw == "judaism");
  }
  SUBCASE("think then call share a turn; second think opens a new one") {
    auto t = parse_transcript("<think>a</think><search>get_tail_relations(m.01)</search>"
                              "<tool_response>r</tool_response><think>b</think>"
                              "<search>get_head_relations(m.02)</search>");
    REQUIRE(t.turns.size() == 2);
    CHECK(t.turns[0].think == "a");
    CHECK(t.turns[1].think == "b");
    CHECK_FALSE(t.turns[1].response.has_value());
  }
  SUBCASE("empty response is an empty list, not absent") {
    auto t = parse_transcript("<search>get_tail_relations(m.99)</search><tool_response>\n</tool_response>");
    REQUIRE(t.turns.size() == 1);
    REQUIRE(t.turns[0].response.has_value());
    CHECK(t.turns[0].response->empty());
  }
  SUBCASE("stray response is dropped") {
    auto t = parse_transcript("<tool_response>x</tool_response><answer>y</answer>");
    CHECK(t.turns.empty());
  }
  SUBCASE("unterminated search is a malformed call") {
    auto t = parse_transcript("<search>get_tail_relations(m.01)");
    REQUIRE(t.call_count() == 1);
    CHECK_FALSE(t.first_call()->parse_ok);
    CHECK(t.flags.test(FormatFlag::kUnparsedCall));
  }
  SUBCASE("unterminated think is literal text") {
    auto t = parse_transcript("<think>hmm <answer>judaism</answer>");
    CHECK(t.final_answer_raw == "judaism");
  }
}

TEST_CASE("format flags") {
  const std::string call = "get_tail_relations(m.01)";
  auto two = parse_transcript(step(call, {"r"}) + step("get_tail_entities(m.01, r)", {"x"}) + answer("x"));
  CHECK(two.flags.empty());

  auto loop = parse_transcript(step(call, {"r"}) + step(call, {"r"}) + step(" get_tail_relations( m.01 ) ", {"r"}) +
                               answer("x"));
  CHECK(loop.flags.test(FormatFlag::kDegenerateLoop));
  auto broken = parse_transcript(step(call, {"r"}) + step(call, {"r"}) +
                                 step("get_tail_entities(m.01, r)", {}) + step(call, {"r"}) + answer("x"));
  CHECK_FALSE(broken.flags.test(FormatFlag::kDegenerateLoop));

  auto no_answer = parse_transcript(step(call, {"r"}));
  CHECK(no_answer.flags.test(FormatFlag::kMissingAnswerEnvelope));

  ParseOptions tight;
  tight.overlong_bytes = 10;
  CHECK(parse_transcript(answer("judaism judaism"), tight).flags.test(FormatFlag::kOverlong));
  CHECK_FALSE(parse_transcript(answer("judaism judaism")).flags.test(FormatFlag::kOverlong));
}

TEST_CASE("parsing is total and search_inside_think matches an independent scan") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5000; ++i) {
    const auto text = random_text(rng, 30);
    Trajectory t;
    CHECK_NOTHROW(t = parse_transcript(text));
    CHECK(t.flags.test(FormatFlag::kSearchInsideThink) == oracle_search_inside_think(text));
    CHECK(t.flags.test(FormatFlag::kMissingAnswerEnvelope) == !t.final_answer_raw.has_value());
    for (const auto& turn : t.turns) {
      if (turn.response) CHECK(turn.call.has_value());
      if (turn.call && turn.call->relation) CHECK(turn.call->parse_ok);
    }
  }
}

TEST_CASE("render then parse reproduces generated trajectories") {
  SynthOptions o;
  o.questions = 60;
  o.max_hops = 3;
  const auto world = make_synthetic_world(o);
  for (const auto kind : {PolicyKind::kGoldPath, PolicyKind::kQuoteAndStop, PolicyKind::kRitualSingleCall,
                          PolicyKind::kFormatDrift, PolicyKind::kMemoryAnswer}) {
    ScriptedPolicy p;
    p.kind = kind;
    p.drift_severity = 0.5;
    for (const auto& gold : world.golds) {
      const auto t = run_policy(p, gold, world.graph);
      const auto back = parse_transcript(render_transcript(t));
      CHECK(back.turns == t.turns);
      CHECK(back.final_answer_raw == t.final_answer_raw);
      CHECK(back.flags == t.flags);
    }
  }
}

TEST_CASE("transcript files") {
  std::stringstream ss;
  write_transcript(ss, {"q1", "<answer>\"quoted\"\n</answer>"});
  write_transcript(ss, {"q2", ""});
  const auto back = read_transcripts(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].transcript == "<answer>\"quoted\"\n</answer>");
  CHECK(back[1].qid == "q2");

  std::istringstream bad("{\"qid\": \"q1\", \"transcript\": \"x\"}\n{\"qid\": 3}\n");
  try {
    (void)read_transcripts(bad);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
  }
}
