// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "doctest.h"
#include "httplib.h"
#include "kgtool/error.hpp"
#include "kgtool/server.hpp"
#include "kgtool/synth.hpp"
#include "kgtool/wire.hpp"
#include "support.hpp"

using namespace kgtool;
using namespace kgtool::testing;

namespace {

ToolRequest req(std::string verb, std::string entity, std::optional<std::string> rel = {}) {
  return {std::move(verb), std::move(entity), std::move(rel), std::nullopt};
}

}  // namespace

TEST_CASE("request dispatch") {
  const auto g = g0();
  auto r = handle_request(g, req("get_tail_entities", "m.01", "people.person.religion"));
  CHECK(r.ok);
  CHECK(r.results == std::vector<std::string>{"judaism"});
  CHECK_FALSE(r.error.has_value());

  r = handle_request(g, req("get_tail_relations", "m.01"));
  CHECK(r.results == std::vector<std::string>{"people.person.place_of_birth", "people.person.religion"});

  r = handle_request(g, req("get_tail_entities", "m.01"));
  CHECK_FALSE(r.ok);
  CHECK(r.error == std::string(kErrBadArity));
  r = handle_request(g, req("get_tail_relations", "m.01", "people.person.religion"));
  CHECK(r.error == std::string(kErrBadArity));
  r = handle_request(g, req("get_tail_entities", "m.01", ""));
  CHECK(r.error == std::string(kErrBadArity));

  r = handle_request(g, req("get_tail_relations", "m.99"));
  CHECK(r.ok);
  CHECK(r.results.empty());

  r = handle_request(g, req("lookup", "m.01"));
  CHECK(r.error == std::string(kErrUnknownVerb));
  r = handle_request(g, req("get_tail_relations", ""));
  CHECK(r.error == std::string(kErrBadRequest));

  r = handle_request(g, req("get_head_entities", "m.07", "film.film.directed_by"), 1);
  CHECK(r.results.size() == 1);
  CHECK(r.truncated);
}

TEST_CASE("bodies and json") {
  const auto g = g0();
  CHECK(handle_body(g, R"({"verb":"get_tail_entities","entity":"m.01","relation":"people.person.religion","request_id":"7"})") ==
        R"({"ok":true,"request_id":"7","results":["judaism"],"truncated":false})");
  const auto bad = reply_from_json(handle_body(g, "not json"));
  CHECK(bad.error == std::string(kErrBadRequest));
  const auto salvaged = reply_from_json(handle_body(g, R"({"verb":3,"entity":"m.01","request_id":"x"})"));
  CHECK(salvaged.error == std::string(kErrBadRequest));
  CHECK(salvaged.request_id == "x");

  ToolRequest a{"get_head_relations", "m.02", std::nullopt, "abc"};
  CHECK(request_from_json(to_json(a)) == a);
  ToolReply b{true, {"x", "y"}, true, std::nullopt, "1"};
  CHECK(reply_from_json(to_json(b)) == b);
  CHECK_THROWS_AS(request_from_json("[]"), DataError);
  CHECK_THROWS_AS(reply_from_json("{"), DataError);
}

TEST_CASE("framing") {
  const auto f = encode_frame("abc");
  CHECK(f == std::string("\0\0\0\3abc", 7));
  FrameDecoder d;
  const std::string stream = encode_frame("first") + encode_frame("") + encode_frame("third");
  for (char c : stream) d.feed(std::string_view(&c, 1));
  CHECK(d.next() == "first");
  CHECK(d.next() == "");
  CHECK(d.next() == "third");
  CHECK_FALSE(d.next().has_value());
  CHECK(d.idle());

  FrameDecoder partial;
  partial.feed(std::string("\0\0\0\5ab", 6));
  CHECK_FALSE(partial.next().has_value());
  CHECK_FALSE(partial.idle());

  FrameDecoder huge;
  CHECK_THROWS_AS(huge.feed(std::string("\x7f\0\0\0", 4)), DataError);
}

TEST_CASE("address parsing") {
  CHECK(parse_address("127.0.0.1:7070") == std::pair<std::string, std::uint16_t>{"127.0.0.1", 7070});
  CHECK(parse_address("[::1]:80") == std::pair<std::string, std::uint16_t>{"::1", 80});
  CHECK(parse_address(":9000").first == "0.0.0.0");
  CHECK_THROWS_AS(parse_address("localhost"), UsageError);
  CHECK_THROWS_AS(parse_address("h:70000"), UsageError);
  CHECK_THROWS_AS(parse_address("h:x"), UsageError);
}

TEST_CASE("tcp server matches in-process dispatch") {
  SynthOptions o;
  o.questions = 30;
  const auto w = extended_reference_world(o);
  ToolServer server(w.graph, {});
  server.start();
  REQUIRE(server.port() != 0);
  ToolClient client("127.0.0.1", server.port());

  std::mt19937_64 rng(5);
  const auto rels = w.graph.relations();
  std::vector<ToolRequest> sent;
  for (int i = 0; i < 200; ++i) {
    const auto verb = kAllVerbs[rng() % 4];
    const auto& e = w.triples[rng() % w.triples.size()];
    ToolRequest r{std::string(verb_name(verb)), rng() % 2 ? e.head : e.tail, std::nullopt, std::to_string(i)};
    if (is_entity_fetch(verb)) r.relation = rels[rng() % rels.size()];
    sent.push_back(r);
    client.send(r);
  }
  for (const auto& r : sent) {
    const auto got = client.receive_raw();
    CHECK(got == to_json(handle_request(w.graph, r)));
  }
  client.send_raw("garbage");
  CHECK(client.receive().error == std::string(kErrBadRequest));
  CHECK(client.call(req("get_tail_entities", "m.01", "people.person.religion")).results ==
        std::vector<std::string>{"judaism"});

  ToolClient second("127.0.0.1", server.port());
  CHECK(second.call(req("get_tail_relations", "m.99")).ok);
  server.stop();
}

TEST_CASE("http binding") {
  HttpToolServer server(g0(), {});
  server.start();
  httplib::Client cli("127.0.0.1", server.port());
  const std::string body = R"({"verb":"get_tail_entities","entity":"m.01","relation":"people.person.religion"})";
  auto res = cli.Post("/v1/tool", body, "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body == handle_body(g0(), body));
  res = cli.Post("/v1/tool", "{}", "application/json");
  REQUIRE(res);
  CHECK(reply_from_json(res->body).error == std::string(kErrBadRequest));
  server.stop();
}
