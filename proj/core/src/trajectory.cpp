// SPDX-License-Identifier: Apache-2.0
#include "kgtool/trajectory.hpp"

#include <array>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "kgtool/error.hpp"
#include "kgtool/text.hpp"

namespace kgtool {

namespace {

enum class Tag { kThink, kSearch, kToolResponse, kAnswer };

struct TagSpec {
  Tag tag;
  std::string_view open;
  std::string_view close;
};

constexpr std::array<TagSpec, 4> kTags = {{
    {Tag::kThink, "<think>", "</think>"},
    {Tag::kSearch, "<search>", "</search>"},
    {Tag::kToolResponse, "<tool_response>", "</tool_response>"},
    {Tag::kAnswer, "<answer>", "</answer>"},
}};

constexpr std::array<std::string_view, 5> kFlagNames = {
    "missing_answer_envelope", "search_inside_think", "unparsed_call", "overlong",
    "degenerate_loop"};

const TagSpec* open_tag_at(std::string_view text, std::size_t pos) {
  for (const auto& spec : kTags) {
    if (text.compare(pos, spec.open.size(), spec.open) == 0) return &spec;
  }
  return nullptr;
}

std::vector<std::string> response_lines(std::string_view body) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= body.size()) {
    auto nl = body.find('\n', start);
    auto line = trim(body.substr(start, nl == std::string_view::npos ? nl : nl - start));
    if (!line.empty()) lines.emplace_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

class TurnBuilder {
 public:
  explicit TurnBuilder(std::vector<Turn>& turns) : turns_(turns) {}

  void think(std::string_view body) {
    if (!open_ || open_->think || open_->call) start();
    open_->think = std::string(body);
  }

  void search(std::string_view body, bool terminated = true) {
    if (!open_ || open_->call) start();
    if (terminated) {
      open_->call = parse_call(body);
    } else {
      ToolCall broken;
      broken.raw_text = std::string(trim(body));
      open_->call = std::move(broken);
    }
  }

  void response(std::string_view body) {
    // Responses with no preceding call in the same turn are dropped.
    if (!open_ || !open_->call || open_->response) return;
    open_->response = response_lines(body);
  }

 private:
  void start() { open_ = &turns_.emplace_back(); }

  std::vector<Turn>& turns_;
  Turn* open_ = nullptr;
};

}  // namespace

std::string ToolCall::canonical() const {
  if (!parse_ok || !verb) return raw_text;
  std::string out(verb_name(*verb));
  out += '(';
  out += entity;
  if (relation) {
    out += ", ";
    out += *relation;
  }
  out += ')';
  return out;
}

ToolCall make_call(ToolVerb verb, std::string entity, std::optional<std::string> relation) {
  ToolCall call;
  call.verb = verb;
  call.entity = std::move(entity);
  if (is_entity_fetch(verb)) call.relation = std::move(relation);
  call.parse_ok = !call.entity.empty() && (!is_entity_fetch(verb) || call.relation);
  call.raw_text = call.canonical();
  return call;
}

std::string_view flag_name(FormatFlag flag) { return kFlagNames[static_cast<std::size_t>(flag)]; }

std::vector<std::string_view> FormatFlags::names() const {
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < kFlagNames.size(); ++i) {
    if (test(static_cast<FormatFlag>(i))) out.push_back(kFlagNames[i]);
  }
  return out;
}

std::size_t Trajectory::call_count() const {
  std::size_t n = 0;
  for (const auto& turn : turns) n += turn.call ? 1 : 0;
  return n;
}

std::vector<const ToolCall*> Trajectory::calls() const {
  std::vector<const ToolCall*> out;
  for (const auto& turn : turns) {
    if (turn.call) out.push_back(&*turn.call);
  }
  return out;
}

const ToolCall* Trajectory::first_call() const {
  for (const auto& turn : turns) {
    if (turn.call) return &*turn.call;
  }
  return nullptr;
}

ToolCall parse_call(std::string_view text) {
  ToolCall call;
  call.raw_text = std::string(trim(text));
  std::string_view body = call.raw_text;

  auto open = body.find('(');
  if (open == std::string_view::npos || body.empty() || body.back() != ')') return call;
  call.verb = parse_verb(trim(body.substr(0, open)));
  if (!call.verb) return call;

  std::string_view args = body.substr(open + 1, body.size() - open - 2);
  if (args.find_first_of("()") != std::string_view::npos) return call;

  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto comma = args.find(',', start);
    parts.push_back(trim(args.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }

  const std::size_t arity = is_entity_fetch(*call.verb) ? 2 : 1;
  if (parts.size() != arity) return call;
  for (auto part : parts) {
    if (part.empty()) return call;
  }
  call.entity = std::string(parts[0]);
  if (arity == 2) call.relation = std::string(parts[1]);
  call.parse_ok = true;
  return call;
}

Trajectory parse_transcript(std::string_view text, const ParseOptions& options) {
  Trajectory traj;
  traj.transcript_bytes = text.size();
  TurnBuilder builder(traj.turns);

  std::size_t pos = 0;
  while (pos < text.size()) {
    auto lt = text.find('<', pos);
    if (lt == std::string_view::npos) break;
    const TagSpec* spec = open_tag_at(text, lt);
    if (spec == nullptr) {
      pos = lt + 1;
      continue;
    }
    const std::size_t body_begin = lt + spec->open.size();
    const auto close = text.find(spec->close, body_begin);
    if (close == std::string_view::npos) {
      // An unterminated search is still an attempted call; other unterminated
      // tags are treated as literal text.
      if (spec->tag == Tag::kSearch) {
        builder.search(text.substr(body_begin), false);
        break;
      }
      pos = body_begin;
      continue;
    }
    const std::string_view body = text.substr(body_begin, close - body_begin);
    switch (spec->tag) {
      case Tag::kThink: builder.think(body); break;
      case Tag::kSearch: builder.search(body); break;
      case Tag::kToolResponse: builder.response(body); break;
      case Tag::kAnswer: traj.final_answer_raw = std::string(trim(body)); break;
    }
    pos = close + spec->close.size();
  }

  traj.flags = format_flags(traj, options);
  return traj;
}

FormatFlags format_flags(const Trajectory& trajectory, const ParseOptions& options) {
  FormatFlags flags;
  if (!trajectory.final_answer_raw) flags.set(FormatFlag::kMissingAnswerEnvelope);
  if (trajectory.transcript_bytes > options.overlong_bytes) flags.set(FormatFlag::kOverlong);

  std::string previous;
  std::size_t run = 0;
  for (const auto& turn : trajectory.turns) {
    if (turn.think && turn.think->find("<search>") != std::string::npos)
      flags.set(FormatFlag::kSearchInsideThink);
    if (!turn.call) continue;
    if (!turn.call->parse_ok) flags.set(FormatFlag::kUnparsedCall);
    std::string key = turn.call->canonical();
    run = (run > 0 && key == previous) ? run + 1 : 1;
    if (options.loop_run > 0 && run >= options.loop_run) flags.set(FormatFlag::kDegenerateLoop);
    previous = std::move(key);
  }
  return flags;
}

std::string render_transcript(const Trajectory& trajectory) {
  std::string out;
  for (const auto& turn : trajectory.turns) {
    if (turn.think) out += "<think>" + *turn.think + "</think>\n";
    if (turn.call) out += "<search>" + turn.call->raw_text + "</search>\n";
    if (turn.response) {
      out += "<tool_response>\n";
      for (const auto& line : *turn.response) out += line + "\n";
      out += "</tool_response>\n";
    }
  }
  if (trajectory.final_answer_raw) out += "<answer>" + *trajectory.final_answer_raw + "</answer>";
  return out;
}

std::vector<TranscriptRecord> read_transcripts(std::istream& in) {
  std::vector<TranscriptRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!row.is_object() || !row.contains("qid") || !row["qid"].is_string() ||
        !row.contains("transcript") || !row["transcript"].is_string()) {
      throw DataError("trajectory row needs string fields \"qid\" and \"transcript\"", line_no);
    }
    records.push_back({row["qid"].get<std::string>(), row["transcript"].get<std::string>()});
  }
  return records;
}

void write_transcript(std::ostream& out, const TranscriptRecord& record) {
  nlohmann::json row = {{"qid", record.qid}, {"transcript", record.transcript}};
  out << row.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

}  // namespace kgtool
