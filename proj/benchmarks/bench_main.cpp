// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "kgtool/diagnostics.hpp"
#include "kgtool/policy.hpp"
#include "kgtool/report.hpp"
#include "kgtool/synth.hpp"

using namespace kgtool;

namespace {

const SyntheticWorld& world() {
  static const SyntheticWorld w = [] {
    SynthOptions o;
    o.questions = 2000;
    o.max_hops = 3;
    o.distractors = 4;
    return make_synthetic_world(o);
  }();
  return w;
}

std::vector<Trajectory> gold_runs() {
  std::vector<Trajectory> out;
  for (const auto& g : world().golds) out.push_back(gen_gold_trajectory(g, world().graph, 0));
  return out;
}

void BM_TailEntities(benchmark::State& state) {
  const auto& w = world();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& t = w.triples[i++ % w.triples.size()];
    benchmark::DoNotOptimize(w.graph.tail_entities(t.head, t.relation));
  }
}
BENCHMARK(BM_TailEntities);

void BM_Execute(benchmark::State& state) {
  const auto& w = world();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& t = w.triples[i++ % w.triples.size()];
    benchmark::DoNotOptimize(execute(w.graph, ToolVerb::kGetHeadEntities, t.tail, t.relation));
  }
}
BENCHMARK(BM_Execute);

void BM_BuildGraph(benchmark::State& state) {
  const auto& w = world();
  for (auto _ : state) benchmark::DoNotOptimize(KnowledgeGraph::from_triples(w.triples, w.aliases));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.triples.size()));
}
BENCHMARK(BM_BuildGraph)->Unit(benchmark::kMillisecond);

void BM_ParseTranscript(benchmark::State& state) {
  const auto text = render_transcript(gen_gold_trajectory(world().golds[0], world().graph, 0));
  for (auto _ : state) benchmark::DoNotOptimize(parse_transcript(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseTranscript);

void BM_ScoreRun(benchmark::State& state) {
  const auto trajs = gold_runs();
  GoldMap golds;
  for (const auto& g : world().golds) golds.emplace(g.qid, g);
  ReportOptions opts;
  opts.threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_report(trajs, golds, world().graph, find_rung("R-selfV"), opts));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trajs.size()));
}
BENCHMARK(BM_ScoreRun)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_Levenshtein(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(levenshtein("people.person.place_of_birth", "location.location.people_born_here"));
}
BENCHMARK(BM_Levenshtein);

}  // namespace

BENCHMARK_MAIN();
