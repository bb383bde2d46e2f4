// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "kgtool/error.hpp"
#include "kgtool/pipeline.hpp"
#include "kgtool/policy.hpp"
#include "kgtool/synth.hpp"
#include "support.hpp"

using namespace kgtool;
using namespace kgtool::testing;

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("kgtool-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("score_file end to end") {
  TempDir dir;
  SynthOptions o;
  o.questions = 25;
  const auto w = make_synthetic_world(o);
  write_world(w, dir.path);
  std::vector<Trajectory> ts;
  for (const auto& g : w.golds) ts.push_back(gen_gold_trajectory(g, w.graph, 0));
  // An unparseable transcript still scores.
  Trajectory junk;
  junk.question_id = w.golds[0].qid;
  {
    std::ofstream out(dir.path / "traj.jsonl", std::ios::binary);
    write_trajectories(out, ts);
    write_transcript(out, {junk.question_id, "<search>unterminated"});
  }
  write(dir.path / "hard.txt", w.golds[0].qid + "\n\n" + w.golds[1].qid + "\n");

  ScoreInputs in;
  in.trajectories = dir.path / "traj.jsonl";
  in.gold = dir.path / "gold.jsonl";
  in.triples = dir.path / "triples.tsv";
  in.aliases = dir.path / "aliases.tsv";
  in.rung = "R-selfV";
  in.hard_subset = dir.path / "hard.txt";
  const auto run = score_file(in);
  CHECK(run.report.n == 26);
  CHECK(run.report.cvt_count == 25);
  // The junk record repeats the first hard qid.
  CHECK(run.report.hard_n == 3);
  CHECK(run.report.hard_cvt_count == 2);
  CHECK(run.records.back().malformed_calls == 1);

  std::stringstream ss;
  write_scored(ss, run.records);
  const auto back = read_scored(ss);
  REQUIRE(back.size() == run.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(to_json(back[i]) == to_json(run.records[i]));
  CHECK(to_json(report_from_json(to_json(run.report))) == to_json(run.report));

  std::stringstream broken("\n{\"qid\":1}\n");
  try {
    read_scored(broken);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("score_file input errors") {
  TempDir dir;
  const auto w = make_synthetic_world({});
  write_world(w, dir.path);
  ScoreInputs in;
  in.trajectories = dir.path / "traj.jsonl";
  in.gold = dir.path / "missing.jsonl";
  in.triples = dir.path / "triples.tsv";
  write(in.trajectories, "");
  CHECK_THROWS_AS(score_file(in), UsageError);

  in.gold = dir.path / "gold.jsonl";
  write(in.trajectories, "{\"qid\":\"nope\",\"transcript\":\"<answer>x</answer>\"}\n");
  CHECK_THROWS_AS(score_file(in), DataError);

  write(in.trajectories, "{\"qid\":\"x\"}\n");
  CHECK_THROWS_AS(score_file(in), DataError);

  in.rung = "R-none";
  CHECK_THROWS_AS(score_file(in), UsageError);
}

TEST_CASE("trajectory files round-trip") {
  TempDir dir;
  const auto t = parse(step("get_tail_entities(m.01, people.person.religion)", {"judaism"}) + answer("judaism"), "q1");
  {
    std::ofstream out(dir.path / "t.jsonl", std::ios::binary);
    write_trajectories(out, std::vector<Trajectory>{t});
  }
  const auto back = load_trajectories(dir.path / "t.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0].question_id == "q1");
  CHECK(back[0].turns == t.turns);
  CHECK(back[0].final_answer_raw == t.final_answer_raw);
  CHECK_THROWS_AS(read_text_file(dir.path / "absent"), UsageError);
}
