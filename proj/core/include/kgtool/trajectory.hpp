// SPDX-License-Identifier: Apache-2.0
#pragma once

// Agent transcript grammar.
//
// A transcript is flat tagged text:
//
//   <think>...</think> <search>verb(args)</search>
//   <tool_response>line\nline</tool_response> ... <answer>...</answer>
//
// Tags are matched left to right, first open tag wins, each closed by the
// nearest matching close tag with no nesting. Parsing is total: anything that
// does not fit becomes a format flag instead of an error.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgtool/graph.hpp"

namespace kgtool {

struct ToolCall {
  /// Set whenever the verb name parsed, even if the arity was wrong.
  std::optional<ToolVerb> verb;
  std::string entity;
  /// Present iff the verb is an entity-fetch verb and parse_ok.
  std::optional<std::string> relation;
  std::string raw_text;
  bool parse_ok = false;

  /// Canonical text form; raw_text for calls that failed to parse.
  std::string canonical() const;

  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

/// Builds a well-formed call with the canonical raw text.
ToolCall make_call(ToolVerb verb, std::string entity, std::optional<std::string> relation = {});

struct Turn {
  std::optional<std::string> think;
  std::optional<ToolCall> call;
  /// Present only when `call` is; may be an empty list (silent failure).
  std::optional<std::vector<std::string>> response;

  bool has_nonempty_response() const { return response && !response->empty(); }

  friend bool operator==(const Turn&, const Turn&) = default;
};

enum class FormatFlag : std::uint8_t {
  kMissingAnswerEnvelope,
  kSearchInsideThink,
  kUnparsedCall,
  kOverlong,
  kDegenerateLoop,
};

std::string_view flag_name(FormatFlag flag);

class FormatFlags {
 public:
  void set(FormatFlag f) { bits_ |= bit(f); }
  bool test(FormatFlag f) const { return (bits_ & bit(f)) != 0; }
  bool empty() const { return bits_ == 0; }
  /// Flag names in declaration order.
  std::vector<std::string_view> names() const;

  friend bool operator==(const FormatFlags&, const FormatFlags&) = default;

 private:
  static std::uint8_t bit(FormatFlag f) {
    return static_cast<std::uint8_t>(1U << static_cast<unsigned>(f));
  }
  std::uint8_t bits_ = 0;
};

struct Trajectory {
  std::string question_id;
  std::vector<Turn> turns;
  std::optional<std::string> final_answer_raw;
  FormatFlags flags;
  std::size_t transcript_bytes = 0;

  std::size_t call_count() const;
  /// Calls in emission order.
  std::vector<const ToolCall*> calls() const;
  /// First call, if any.
  const ToolCall* first_call() const;
};

struct ParseOptions {
  /// Transcripts longer than this many bytes get the overlong flag.
  std::size_t overlong_bytes = 32768;
  /// This many identical consecutive calls count as a degenerate loop.
  std::size_t loop_run = 3;
};

Trajectory parse_transcript(std::string_view text, const ParseOptions& options = {});

/// Accepts `verb(entity)` or `verb(entity, relation)`; whitespace around the
/// verb and each argument is tolerated. Never throws.
ToolCall parse_call(std::string_view text);

/// Recomputes the flag set from the trajectory's structure.
FormatFlags format_flags(const Trajectory& trajectory, const ParseOptions& options = {});

/// Inverse of parse_transcript for well-formed trajectories.
std::string render_transcript(const Trajectory& trajectory);

/// One record of a trajectory dump file.
struct TranscriptRecord {
  std::string qid;
  std::string transcript;
};

/// Reads JSON-lines `{"qid": ..., "transcript": ...}`. Throws DataError with
/// the line number on malformed rows.
std::vector<TranscriptRecord> read_transcripts(std::istream& in);
void write_transcript(std::ostream& out, const TranscriptRecord& record);

}  // namespace kgtool
