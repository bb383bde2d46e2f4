// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reward fixtures shared by the unit suite and the acceptance run. Expected
// values are written as the hand-derived fractions, not as library output.

#include <functional>
#include <string>
#include <vector>

#include "kgtool/graph.hpp"
#include "kgtool/reward.hpp"
#include "support.hpp"

namespace kgtool::testing {

struct RewardCase {
  std::string name;
  std::function<double()> actual;
  double expected;
};

inline std::vector<RewardCase> reward_cases() {
  using S = std::vector<std::string>;
  const auto religion = religion_gold();
  const auto director = director_gold();
  const std::string listing = step("get_tail_relations(m.01)", {"people.person.place_of_birth", "people.person.religion"});
  const std::string fetch_religion = step("get_tail_entities(m.01, people.person.religion)", {"judaism"});

  std::vector<RewardCase> cases;
  auto add = [&](std::string name, std::function<double()> fn, double expected) {
    cases.push_back({std::move(name), std::move(fn), expected});
  };

  add("r_em identity", [] { return r_em("judaism", S{"judaism"}); }, 1.0);
  add("r_em wrong entity", [] { return r_em("roman holiday", S{"william wyler"}); }, 0.0);
  add("r_em substring is not a match", [] { return r_em("wyler", S{"william wyler"}); }, 0.0);
  add("r_em max over golds", [] { return r_em("wyler", S{"william wyler", "wyler"}); }, 1.0);

  add("r_f1 identity", [] { return r_f1("william wyler", S{"william wyler"}); }, 1.0);
  // P = 1/2, R = 1, F1 = 2PR / (P + R)
  add("r_f1 partial overlap", [] { return r_f1("william wyler", S{"wyler"}); },
      2.0 * 0.5 * 1.0 / (0.5 + 1.0));
  add("r_f1 empty prediction", [] { return r_f1("", S{"judaism"}); }, 0.0);
  // Multiset overlap: "x x y" vs "x y y" shares {x, y}; P = R = 2/3.
  add("r_f1 multiset overlap", [] { return r_f1("x x y", S{"x y y"}); }, 2.0 / 3.0);

  add("r_out exact", [] { return r_out("judaism", S{"judaism"}); }, 1.0);
  add("r_out partial", [] { return r_out("william wyler", S{"wyler"}); }, 0.5 * 0.0 + 0.5 * (2.0 / 3.0));
  add("r_out empty", [] { return r_out("", S{"x"}); }, 0.0);

  add("r_valid one of three malformed",
      [=] {
        return r_valid(parse(listing + step("lookup(m.01)", {}) + fetch_religion + answer("judaism")));
      },
      2.0 / 3.0);
  add("r_valid no calls", [] { return r_valid(parse(answer("judaism"))); }, 0.0);
  add("r_valid all valid", [=] { return r_valid(parse(listing + fetch_religion + answer("judaism"))); }, 1.0);

  add("r_path relation on chain",
      [=] { return r_path(parse(fetch_religion + answer("judaism")), religion); }, 1.0);
  add("r_path listing calls only", [=] { return r_path(parse(listing + answer("judaism")), religion); }, 0.0);
  add("r_path relation off chain",
      [=] {
        return r_path(parse(step("get_tail_entities(m.01, people.person.nationality)", {}) + answer("x")),
                      religion);
      },
      0.0);

  // Eight think tokens embedding the four call tokens: 2 * 4 / (8 + 4).
  add("r_coh think embeds the call",
      [] {
        return r_coh(parse("<think>first get_tail_entities(m.01, people.person.religion, extra) then answer it"
                           "</think><search>get_tail_entities(m.01, people.person.religion, extra)</search>"));
      },
      2.0 * 4.0 / (8.0 + 4.0));
  // Five think tokens containing the two call tokens: 2 * 2 / (5 + 2).
  add("r_coh well-formed call",
      [] {
        return r_coh(parse("<think>so get_tail_relations(m.01) next then</think>"
                           "<search>get_tail_relations(m.01)</search>"));
      },
      2.0 * 2.0 / (5.0 + 2.0));
  add("r_coh no think spans", [=] { return r_coh(parse(listing + answer("x"))); }, 0.0);
  add("r_coh no shared tokens",
      [] { return r_coh(parse("<think>hello world</think><search>get_tail_relations(m.01)</search>")); }, 0.0);

  add("r_tool_type two verbs", [=] { return r_tool_type(parse(listing + fetch_religion)); }, 2.0 / 4.0);
  add("r_tool_type no calls", [] { return r_tool_type(parse(answer("x"))); }, 0.0);
  add("r_tool_type all four verbs",
      [=] {
        return r_tool_type(parse(listing + fetch_religion + step("get_head_relations(m.02)", {}) +
                                 step("get_head_entities(m.02, people.person.religion)", {})));
      },
      1.0);
  add("r_tool_type ignores malformed calls",
      [] { return r_tool_type(parse(step("get_tail_entities(m.01)", {}) + step("lookup(x)", {}))); }, 0.0);

  add("r_tool_usage one of two empty",
      [=] { return r_tool_usage(parse(fetch_religion + step("get_tail_relations(m.99)", {}))); }, 1.0 / 2.0);
  add("r_tool_usage no calls", [] { return r_tool_usage(parse(answer("x"))); }, 0.0);
  add("r_tool_usage all non-empty", [=] { return r_tool_usage(parse(listing + fetch_religion)); }, 1.0);

  add("r_retrv one productive of two",
      [=] { return r_retrv(parse(fetch_religion + step("get_tail_relations(m.99)", {}) + answer("judaism"))); },
      1.0 / 2.0);
  add("r_retrv quote and stop",
      [] {
        return r_retrv(parse(step("get_tail_entities(m.04, film.actor.film)", {"roman holiday"}) +
                             answer("roman holiday")));
      },
      1.0);
  add("r_retrv no calls", [] { return r_retrv(parse(answer("judaism"))); }, 0.0);
  add("r_retrv normalized containment",
      [] { return r_retrv(parse(step("get_tail_entities(m.04, film.actor.film)", {"Roman Holiday!"}) +
                                answer("it was the roman holiday"))); },
      1.0);

  add("r_ans exact", [] { return r_ans("william wyler", S{"william wyler"}); }, 1.0);
  // lenient = 1/2 gold tokens present; F1 with P = 1, R = 1/2.
  add("r_ans partial", [] { return r_ans("wyler", S{"william wyler"}); },
      0.5 * 0.5 + 0.5 * (2.0 * 1.0 * 0.5 / 1.5));
  add("r_ans disjoint", [] { return r_ans("roman holiday", S{"william wyler"}); }, 0.0);

  add("R-binary exact", [=] { return score("R-binary", parse(fetch_religion + answer("Judaism")), religion).total; },
      1.0);
  add("R-binary-SR equals R-binary",
      [=] { return score("R-binary-SR", parse(answer("william wyler")), make_gold("q", "", {"wyler"}, {}, {})).total; },
      0.5 * 0.0 + 0.5 * (2.0 / 3.0));
  // r_out = r_valid = r_path = 1, no think span so r_coh = 0.
  add("R-stepwise three of four",
      [=] { return score("R-stepwise", parse(listing + fetch_religion + answer("judaism")), religion).total; },
      0.25 * 1 + 0.25 * 1 + 0.25 * 1 + 0.25 * 0);
  add("R-toolverbs composite",
      [=] {
        return score("R-toolverbs", parse(fetch_religion + step("get_tail_relations(m.99)", {}) + answer("judaism")),
                     religion)
            .total;
      },
      0.25 * 1.0 + 0.50 * (2.0 / 4.0) + 0.25 * (1.0 / 2.0));
  add("R-toolverbs-KL equals R-toolverbs",
      [=] {
        return score("R-toolverbs·KL", parse(fetch_religion + step("get_tail_relations(m.99)", {}) + answer("judaism")),
                     religion)
            .total;
      },
      0.25 * 1.0 + 0.50 * (2.0 / 4.0) + 0.25 * (1.0 / 2.0));
  // Quote-and-stop on the film question: r_ans = 0, r_tool_type = 1/4, r_retrv = 1.
  add("R-selfV quote and stop",
      [=] {
        return score("R-selfV",
                     parse(step("get_tail_entities(m.04, film.actor.film)", {"roman holiday"}) +
                           answer("roman holiday")),
                     director)
            .total;
      },
      0.25 * 0.0 + 0.50 * 0.25 + 0.25 * 1.0);
  return cases;
}

}  // namespace kgtool::testing
