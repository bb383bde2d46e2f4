// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "kgtool/classifier.hpp"
#include "kgtool/error.hpp"
#include "kgtool/policy.hpp"
#include "kgtool/synth.hpp"
#include "kgtool/text.hpp"
#include "support.hpp"

using namespace kgtool;
using namespace kgtool::testing;

namespace {

ScriptedPolicy policy(PolicyKind kind) {
  ScriptedPolicy p;
  p.kind = kind;
  return p;
}

GoldMap index_of(const std::vector<GoldRecord>& golds) {
  GoldMap m;
  for (const auto& g : golds) m.emplace(g.qid, g);
  return m;
}

}  // namespace

TEST_CASE("gold-path on the fixture graph") {
  const auto g = g0();
  auto t = gen_gold_trajectory(religion_gold(), g, 0);
  REQUIRE(t.call_count() == 2);
  CHECK(t.calls()[0]->canonical() == "get_tail_relations(m.01)");
  CHECK(t.calls()[1]->canonical() == "get_tail_entities(m.01, people.person.religion)");
  CHECK(t.final_answer_raw == "judaism");
  CHECK(t.flags.empty());
  CHECK(classify(t, religion_gold(), g) == Category::kCorrectViaTool);

  t = gen_gold_trajectory(director_gold(), g, 1);
  REQUIRE(t.call_count() == 4);
  CHECK(t.calls()[3]->canonical() == "get_tail_entities(m.05, film.film.directed_by)");
  CHECK(t.final_answer_raw == "william wyler");
  CHECK(classify(t, director_gold(), g) == Category::kCorrectViaTool);

  const auto absent = make_gold("q", "", {"x"}, {{"m.01", "film.actor.film", "m.05"}}, {"m.01"});
  CHECK_THROWS_AS(gen_gold_trajectory(absent, g, 0), DataError);
  CHECK_THROWS_AS(gen_gold_trajectory(make_gold("q", "", {"x"}, {}, {"m.01"}), g, 0), UsageError);
}

TEST_CASE("think templates are frozen and filled") {
  const auto t = gen_gold_trajectory(religion_gold(), g0(), 2);
  REQUIRE(t.turns[0].think.has_value());
  const auto& think = *t.turns[0].think;
  CHECK(think.find("ovadia yosef") != std::string::npos);
  CHECK(think.find("people.person.religion") != std::string::npos);
  CHECK(think.find('{') == std::string::npos);
  CHECK(think_templates().size() == 3);
}

TEST_CASE("gold-path over synthetic worlds") {
  SynthOptions o;
  o.questions = 120;
  o.max_hops = 5;
  const auto w = make_synthetic_world(o);
  for (const auto& gold : w.golds) {
    const auto t = gen_gold_trajectory(gold, w.graph, 7);
    CHECK(t.call_count() <= kMaxToolCalls);
    CHECK(normalize_answer(*t.final_answer_raw) == gold.answers.front());
    for (const auto& turn : t.turns) {
      if (!turn.call) continue;
      const auto r = execute(w.graph, *turn.call->verb, turn.call->entity, turn.call->relation.value_or(""));
      CHECK(*turn.response == r.lines);
    }
    CHECK(classify(t, gold, w.graph) == Category::kCorrectViaTool);
  }
}

TEST_CASE("quote-and-stop quotes the first listed entity") {
  const auto t = run_policy(policy(PolicyKind::kQuoteAndStop), director_gold(), g0());
  REQUIRE(t.call_count() == 1);
  CHECK(t.final_answer_raw == "roman holiday");
  CHECK_FALSE(normalized_em(t, director_gold()));
  CHECK(r_retrv(t) == 1.0);
  CHECK_THROWS_AS(run_policy(policy(PolicyKind::kQuoteAndStop), make_gold("q", "", {"x"}, {}, {}), g0()),
                  UsageError);
}

TEST_CASE("ritual call answers from memory") {
  auto p = policy(PolicyKind::kRitualSingleCall);
  p.memory.emplace("q-religion", "judaism");
  const auto t = run_policy(p, religion_gold(), g0());
  REQUIRE(t.call_count() == 1);
  CHECK(t.calls()[0]->verb == ToolVerb::kGetTailRelations);
  CHECK(normalized_em(t, religion_gold()));
  CHECK(classify(t, religion_gold(), g0()) == Category::kCorrectViaMemory);
  const auto u = run_policy(p, director_gold(), g0());
  CHECK(u.final_answer_raw == "unknown");
}

TEST_CASE("memory-answer and format-drift") {
  auto m = policy(PolicyKind::kMemoryAnswer);
  m.memory.emplace("q-religion", "judaism");
  const auto t = run_policy(m, religion_gold(), g0());
  CHECK(t.call_count() == 0);
  CHECK(classify(t, religion_gold(), g0()) == Category::kCorrectNoTool);

  auto d = policy(PolicyKind::kFormatDrift);
  d.drift_severity = 1.0;
  const auto drifted = run_policy(d, director_gold(), g0());
  CHECK(drifted.call_count() == 0);
  CHECK(drifted.flags.test(FormatFlag::kSearchInsideThink));
  d.drift_severity = 0.5;
  const auto half = run_policy(d, director_gold(), g0());
  CHECK(half.call_count() == 2);
  d.drift_severity = 1.5;
  CHECK_THROWS_AS(run_policy(d, director_gold(), g0()), UsageError);
}

TEST_CASE("policy names") {
  for (auto k : {PolicyKind::kGoldPath, PolicyKind::kQuoteAndStop, PolicyKind::kRitualSingleCall,
                 PolicyKind::kFormatDrift, PolicyKind::kMemoryAnswer})
    CHECK(parse_policy(policy_name(k)) == k);
  CHECK_THROWS_AS(parse_policy("random"), UsageError);
}

TEST_CASE("simulated runs carry the policy signatures") {
  const auto w = make_synthetic_world({});
  const auto& rung = find_rung("R-selfV");

  const auto gold = simulate_run(policy(PolicyKind::kGoldPath), w.golds, w.graph, rung);
  CHECK(gold.scored.report.em_rate == 1.0);
  CHECK(gold.scored.report.cvt_count == w.golds.size());

  auto r = policy(PolicyKind::kRitualSingleCall);
  for (const auto& g : w.golds) r.memory.emplace(g.qid, g.answers_raw.front());
  const auto ritual = simulate_run(r, w.golds, w.graph, rung);
  CHECK(ritual.scored.report.tools_per_q == 1.0);
  CHECK(ritual.scored.report.cvt_count == 0);
  CHECK(ritual.scored.report.em_rate == 1.0);

  const auto memory = simulate_run(policy(PolicyKind::kMemoryAnswer), w.golds, w.graph, rung);
  CHECK(memory.scored.report.tools_per_q == 0.0);
}

TEST_CASE("distill filter") {
  const auto w = make_synthetic_world({});
  const auto golds = index_of(w.golds);
  std::vector<Trajectory> ts;
  for (const auto& g : w.golds) ts.push_back(gen_gold_trajectory(g, w.graph, 0));
  auto f = self_distill_filter(ts, golds);
  CHECK(f.yield == 1.0);
  CHECK(f.rejected.empty());

  // Three clean, one with a corrupted answer.
  std::vector<Trajectory> mixed(ts.begin(), ts.begin() + 4);
  mixed[3].final_answer_raw = "corrupted";
  f = self_distill_filter(mixed, golds);
  CHECK(f.yield == 0.75);
  REQUIRE(f.rejected.size() == 1);
  CHECK(f.rejected[0].second == RejectReason::kEmFail);

  // EM-correct from memory with no productive call.
  auto r = policy(PolicyKind::kRitualSingleCall);
  r.memory.emplace(w.golds[0].qid, w.golds[0].answers_raw.front());
  f = self_distill_filter(std::vector<Trajectory>{run_policy(r, w.golds[0], w.graph)}, golds);
  REQUIRE(f.rejected.size() == 1);
  CHECK(f.rejected[0].second == RejectReason::kNotProductive);

  // Correct and productive, plus one malformed call.
  auto bad = ts[0];
  Turn extra;
  extra.call = parse_call("lookup(x)");
  extra.response = std::vector<std::string>{};
  bad.turns.push_back(extra);
  bad.flags = format_flags(bad);
  f = self_distill_filter(std::vector<Trajectory>{bad}, golds);
  REQUIRE(f.rejected.size() == 1);
  CHECK(f.rejected[0].second == RejectReason::kFormatInvalid);

  Trajectory orphan;
  orphan.question_id = "nope";
  CHECK_THROWS_AS(self_distill_filter(std::vector<Trajectory>{orphan}, golds), DataError);
  CHECK(self_distill_filter(std::vector<Trajectory>{}, golds).yield == 0.0);
}

TEST_CASE("filtered trajectories are all sound") {
  SynthOptions o;
  o.questions = 60;
  const auto w = make_synthetic_world(o);
  const auto golds = index_of(w.golds);
  std::vector<Trajectory> ts;
  for (auto kind : {PolicyKind::kGoldPath, PolicyKind::kQuoteAndStop, PolicyKind::kFormatDrift})
    for (const auto& g : w.golds) ts.push_back(run_policy(policy(kind), g, w.graph));
  const auto f = self_distill_filter(ts, golds);
  CHECK(f.kept.size() + f.rejected.size() == ts.size());
  for (const auto& t : f.kept) {
    const auto& g = golds.at(t.question_id);
    CHECK(normalized_em(t, g));
    CHECK(entity_in_answer(t));
    CHECK_FALSE(t.flags.test(FormatFlag::kSearchInsideThink));
    CHECK_FALSE(t.flags.test(FormatFlag::kUnparsedCall));
    CHECK_FALSE(t.flags.test(FormatFlag::kMissingAnswerEnvelope));
  }
}
