// SPDX-License-Identifier: Apache-2.0
#include "kgtool/synth.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string_view>

#include "kgtool/error.hpp"

namespace kgtool {

namespace {

constexpr std::array<std::string_view, 8> kDomains = {
    "people", "film", "music", "location", "book", "sports", "organization", "education"};
constexpr std::array<std::string_view, 4> kTypes = {"entity", "work", "agent", "topic"};
constexpr std::array<std::string_view, 10> kProperties = {
    "founder", "member_of", "located_in", "author", "genre",
    "influenced_by", "part_of", "award", "language", "successor"};

constexpr std::string_view kIdAlphabet = "0123456789bcdfghjklmnpqrstvwxyz_";
constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";

class WorldBuilder {
 public:
  explicit WorldBuilder(std::uint64_t seed) : rng_(seed) {}

  std::string new_entity() {
    std::string id;
    do {
      id = "m.0";
      for (int i = 0; i < 6; ++i) id += kIdAlphabet[pick(kIdAlphabet.size())];
    } while (!ids_.insert(id).second);
    std::string label;
    do {
      label = word() + " " + word();
    } while (!labels_.insert(label).second);
    aliases_.emplace_back(id, label);
    by_id_.emplace(id, std::move(label));
    return id;
  }

  const std::string& label(const std::string& id) const { return by_id_.at(id); }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::vector<KnowledgeGraph::Alias>& aliases() { return aliases_; }

 private:
  std::string word() {
    std::string w;
    for (int i = 0; i < 5; ++i) w += kLetters[pick(kLetters.size())];
    return w;
  }

  std::mt19937_64 rng_;
  std::set<std::string> ids_;
  std::set<std::string> labels_;
  std::map<std::string, std::string> by_id_;
  std::vector<KnowledgeGraph::Alias> aliases_;
};

std::vector<std::string> relation_vocabulary(std::size_t n) {
  std::vector<std::string> out;
  for (auto p : kProperties) {
    for (auto d : kDomains) {
      for (auto t : kTypes) {
        if (out.size() == n) return out;
        out.push_back(std::string(d) + "." + std::string(t) + "." + std::string(p));
      }
    }
  }
  return out;
}

}  // namespace

SyntheticWorld make_synthetic_world(const SynthOptions& options) {
  if (options.min_hops == 0 || options.min_hops > options.max_hops)
    throw UsageError("hop range must satisfy 1 <= min_hops <= max_hops");
  if (options.relation_vocab < 2) throw UsageError("relation vocabulary needs at least 2 entries");
  if (!(options.sibling_rate >= 0.0 && options.sibling_rate <= 1.0))
    throw UsageError("sibling rate must lie in [0, 1]");

  const auto vocab = relation_vocabulary(options.relation_vocab);
  WorldBuilder b(options.seed);
  SyntheticWorld world;

  for (std::size_t q = 0; q < options.questions; ++q) {
    const std::size_t hops = options.min_hops + b.pick(options.max_hops - options.min_hops + 1);
    const std::string seed = b.new_entity();
    std::string head = seed;
    std::vector<Triple> chain;
    for (std::size_t h = 0; h < hops; ++h) {
      const std::string& rel = vocab[b.pick(vocab.size())];
      std::string tail = b.new_entity();
      chain.push_back({head, rel, tail});
      if (b.chance(options.sibling_rate)) world.triples.push_back({head, rel, b.new_entity()});
      for (std::size_t d = 0; d < options.distractors; ++d) {
        std::string other;
        do {
          other = vocab[b.pick(vocab.size())];
        } while (other == rel);
        world.triples.push_back({head, other, b.new_entity()});
      }
      head = std::move(tail);
    }
    world.triples.insert(world.triples.end(), chain.begin(), chain.end());

    const std::string answer = b.label(chain.back().tail);
    std::string question = "which entity is reached from " + b.label(seed);
    for (const auto& t : chain) question += " via " + t.relation;
    char qid[16];
    std::snprintf(qid, sizeof qid, "syn-%05zu", q + 1);
    world.golds.push_back(make_gold(qid, question, {answer}, std::move(chain), {seed}));
  }
  world.aliases = std::move(b.aliases());
  world.graph = KnowledgeGraph::from_triples(world.triples, world.aliases);
  return world;
}

std::vector<Triple> reference_triples() {
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

std::vector<KnowledgeGraph::Alias> reference_aliases() {
  return {
      {"m.01", "ovadia yosef"},  {"m.02", "judaism"},        {"m.03", "jerusalem"},
      {"m.04", "audrey hepburn"}, {"m.05", "roman holiday"}, {"m.06", "abraham"},
      {"m.07", "william wyler"},  {"m.08", "united kingdom"}, {"m.09", "ben-hur"},
  };
}

KnowledgeGraph reference_graph() {
  const auto triples = reference_triples();
  const auto aliases = reference_aliases();
  return KnowledgeGraph::from_triples(triples, aliases);
}

SyntheticWorld extended_reference_world(const SynthOptions& options) {
  SyntheticWorld world = make_synthetic_world(options);
  const auto triples = reference_triples();
  const auto aliases = reference_aliases();
  world.triples.insert(world.triples.begin(), triples.begin(), triples.end());
  world.aliases.insert(world.aliases.begin(), aliases.begin(), aliases.end());
  world.graph = KnowledgeGraph::from_triples(world.triples, world.aliases);
  return world;
}

void write_world(const SyntheticWorld& world, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw UsageError("cannot write " + (dir / name).string());
    return out;
  };
  auto triples = open("triples.tsv");
  for (const auto& t : world.triples) triples << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  auto aliases = open("aliases.tsv");
  for (const auto& [id, label] : world.aliases) aliases << id << '\t' << label << '\n';
  auto gold = open("gold.jsonl");
  for (const auto& g : world.golds) write_gold(gold, g);
}

}  // namespace kgtool
