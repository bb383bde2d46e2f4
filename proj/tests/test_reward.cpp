// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "doctest.h"
#include "kgtool/error.hpp"
#include "kgtool/reward.hpp"
#include "kgtool/text.hpp"
#include "reward_cases.hpp"
#include "support.hpp"

using namespace kgtool;
using namespace kgtool::testing;

TEST_CASE("reward fixtures") {
  const auto cases = reward_cases();
  CHECK(cases.size() >= 18);
  for (const auto& c : cases) {
    CAPTURE(c.name);
    CHECK(std::fabs(c.actual() - c.expected) <= 1e-9);
  }
}

TEST_CASE("ladder shape") {
  const auto& rungs = ladder();
  REQUIRE(rungs.size() == 6);
  const std::vector<std::string> names = {"R-binary", "R-binary-SR", "R-stepwise",
                                          "R-toolverbs", "R-toolverbs·KL", "R-selfV"};
  for (std::size_t i = 0; i < rungs.size(); ++i) {
    CHECK(rungs[i].name == names[i]);
    double sum = 0;
    for (const auto& [c, w] : rungs[i].weights) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(rungs[0].weights == rungs[1].weights);
  CHECK(rungs[3].weights == rungs[4].weights);
  CHECK(&find_rung("R-toolverbs-KL") == &find_rung("R-toolverbs·KL"));
  CHECK(&find_rung("R-toolverbs.KL") == &find_rung("R-toolverbs·KL"));
  CHECK_THROWS_AS(find_rung("R-unknown"), UsageError);
}

TEST_CASE("declared weights") {
  auto weight = [](const char* rung, Component c) {
    for (const auto& [comp, w] : find_rung(rung).weights)
      if (comp == c) return w;
    return 0.0;
  };
  CHECK(weight("R-binary", Component::kEm) == 0.5);
  CHECK(weight("R-binary", Component::kF1) == 0.5);
  for (auto c : {Component::kOut, Component::kValid, Component::kPath, Component::kCoh})
    CHECK(weight("R-stepwise", c) == 0.25);
  CHECK(weight("R-toolverbs", Component::kOut) == 0.25);
  CHECK(weight("R-toolverbs", Component::kToolType) == 0.5);
  CHECK(weight("R-toolverbs", Component::kToolUsage) == 0.25);
  CHECK(weight("R-selfV", Component::kAns) == 0.25);
  CHECK(weight("R-selfV", Component::kToolType) == 0.5);
  CHECK(weight("R-selfV", Component::kRetrv) == 0.25);
}

TEST_CASE("empty gold lists are rejected") {
  const std::vector<std::string> none;
  CHECK_THROWS_AS(r_em("x", none), UsageError);
  CHECK_THROWS_AS(r_f1("x", none), UsageError);
  CHECK_THROWS_AS(r_ans("x", none), UsageError);
}

TEST_CASE("lcs ratio and coherence tokens") {
  using S = std::vector<std::string>;
  CHECK(coherence_tokens("Get_Tail_Relations( m.01 ,r )") == S{"get_tail_relations", "m.01", "r"});
  CHECK(lcs_ratio(S{}, S{}) == 0.0);
  CHECK(lcs_ratio(S{"a", "b", "c"}, S{"a", "c"}) == doctest::Approx(2.0 * 2 / 5));
}

TEST_CASE("components and totals stay in [0, 1]; totals recompute from weights") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> calls = {
      "get_tail_relations(m.01)", "get_tail_entities(m.01, people.person.religion)",
      "get_head_entities(m.07, film.film.directed_by)", "get_head_relations(m.02)", "bad(", "lookup(x)"};
  const std::vector<std::string> lines = {"judaism", "William Wyler", "", "roman holiday", "the"};
  const std::vector<std::string> answers = {"judaism", "", "the judaism", "wyler", "roman holiday judaism"};
  const auto gold = director_gold();
  for (int i = 0; i < 2000; ++i) {
    std::string text;
    const int n = static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) {
      if (rng() % 2) text += "<think>" + calls[rng() % calls.size()] + " maybe</think>";
      std::vector<std::string> resp;
      for (int j = 0; j < static_cast<int>(rng() % 3); ++j) resp.push_back(lines[rng() % lines.size()]);
      text += step(calls[rng() % calls.size()], resp);
    }
    if (rng() % 4) text += answer(answers[rng() % answers.size()]);
    const auto t = parse(text);
    for (const auto& rung : ladder()) {
      const auto b = score(rung, t, gold);
      double total = 0;
      for (const auto& [c, w] : rung.weights) {
        const double v = b.components.at(std::string(component_name(c)));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        total += w * v;
      }
      CHECK(b.total == total);
      CHECK(b.total >= 0.0);
      CHECK(b.total <= 1.0);
    }
  }
}

TEST_CASE("single quoted entity maximizes r_retrv regardless of correctness") {
  const auto gold = director_gold();
  const auto t = parse(step("get_tail_entities(m.04, people.person.nationality)", {"united kingdom"}) +
                       answer("united kingdom"));
  CHECK(r_retrv(t) == 1.0);
  CHECK(r_em(normalize_answer(*t.final_answer_raw), gold.answers) == 0.0);
}

TEST_CASE("ritual call with a memory answer") {
  const auto t = parse(step("get_tail_relations(m.01)", {"people.person.place_of_birth", "people.person.religion"}) +
                       answer("judaism"));
  CHECK(r_valid(t) == 1.0);
  CHECK(r_tool_usage(t) == 1.0);
  CHECK(r_retrv(t) == 0.0);
}

TEST_CASE("breakdown json") {
  const auto b = score("R-selfV", parse(answer("judaism")), religion_gold());
  const auto j = to_json(b);
  CHECK(j.find("\"rung\":\"R-selfV\"") != std::string::npos);
  CHECK(j.find("\"r_retrv\"") != std::string::npos);
}
