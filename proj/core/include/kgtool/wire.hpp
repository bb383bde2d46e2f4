// SPDX-License-Identifier: Apache-2.0
#pragma once

// Tool-API wire format.
//
// Each message is a JSON object preceded by its byte length as a 4-byte
// big-endian unsigned integer. A client sends one request per frame and
// receives one reply per frame, in order; request_id is echoed so clients can
// pipeline.
//
//   request: {"verb": "...", "entity": "...", "relation": "...", "request_id": "..."}
//   reply:   {"ok": true, "results": [...], "truncated": false, "request_id": "..."}
//            {"ok": false, "error": "bad_arity", "results": [], "truncated": false}

#include <cstddef>
#include <cstdint>
#include <utility>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgtool/graph.hpp"

namespace kgtool {

struct ToolRequest {
  std::string verb;
  std::string entity;
  std::optional<std::string> relation;
  std::optional<std::string> request_id;

  friend bool operator==(const ToolRequest&, const ToolRequest&) = default;
};

struct ToolReply {
  bool ok = false;
  std::vector<std::string> results;
  bool truncated = false;
  std::optional<std::string> error;
  std::optional<std::string> request_id;

  friend bool operator==(const ToolReply&, const ToolReply&) = default;
};

/// Error codes carried in ToolReply::error.
inline constexpr std::string_view kErrUnknownVerb = "unknown_verb";
inline constexpr std::string_view kErrBadArity = "bad_arity";
inline constexpr std::string_view kErrBadRequest = "bad_request";

/// Dispatches one request. Never throws; failures come back as ok=false.
ToolReply handle_request(const KnowledgeGraph& graph, const ToolRequest& request,
                         std::size_t cap = kDefaultResultCap);

/// Parses a request body, handles it and serializes the reply. A body that is
/// not a valid request object yields a bad_request reply.
std::string handle_body(const KnowledgeGraph& graph, std::string_view body,
                        std::size_t cap = kDefaultResultCap);

std::string to_json(const ToolRequest& request);
std::string to_json(const ToolReply& reply);
/// Throws DataError on a body that is not a request object.
ToolRequest request_from_json(std::string_view body);
/// Throws DataError on a body that is not a reply object.
ToolReply reply_from_json(std::string_view body);

/// Largest accepted frame payload.
inline constexpr std::size_t kMaxFrameBytes = 16U << 20;

std::string encode_frame(std::string_view payload);

/// Incremental frame splitter for a byte stream.
class FrameDecoder {
 public:
  /// Appends bytes; throws DataError when a length prefix exceeds
  /// kMaxFrameBytes.
  void feed(std::string_view bytes);
  /// Next complete payload, if one is buffered.
  std::optional<std::string> next();
  bool idle() const { return buffer_.empty(); }

 private:
  std::string buffer_;
  std::size_t offset_ = 0;
};

/// Blocking client over one TCP connection.
class ToolClient {
 public:
  /// Throws Error when the connection cannot be established.
  ToolClient(const std::string& host, std::uint16_t port);
  ~ToolClient();
  ToolClient(const ToolClient&) = delete;
  ToolClient& operator=(const ToolClient&) = delete;

  ToolReply call(const ToolRequest& request);

  /// Pipelining: queue several requests, then read replies in order.
  void send(const ToolRequest& request);
  void send_raw(std::string_view body);
  std::string receive_raw();
  ToolReply receive();

 private:
  int fd_ = -1;
  FrameDecoder decoder_;
};

/// Splits "host:port"; throws UsageError on a malformed address.
std::pair<std::string, std::uint16_t> parse_address(std::string_view addr);

}  // namespace kgtool
