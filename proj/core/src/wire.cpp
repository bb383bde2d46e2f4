// SPDX-License-Identifier: Apache-2.0
#include "kgtool/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "json.hpp"
#include "kgtool/error.hpp"

namespace kgtool {

namespace {

using nlohmann::json;

ToolReply failure(std::string_view code, const std::optional<std::string>& request_id) {
  ToolReply reply;
  reply.error = std::string(code);
  reply.request_id = request_id;
  return reply;
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

json parse_object(std::string_view body) {
  json obj = json::parse(body.begin(), body.end(), nullptr, false);
  if (obj.is_discarded()) throw DataError("body is not valid JSON");
  if (!obj.is_object()) throw DataError("body must be a JSON object");
  return obj;
}

void write_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(std::string("send failed: ") + std::strerror(errno));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

ToolReply handle_request(const KnowledgeGraph& graph, const ToolRequest& request,
                         std::size_t cap) {
  const auto verb = parse_verb(request.verb);
  if (!verb) return failure(kErrUnknownVerb, request.request_id);
  if (request.entity.empty()) return failure(kErrBadRequest, request.request_id);
  const bool wants_relation = is_entity_fetch(*verb);
  if (wants_relation != request.relation.has_value() ||
      (wants_relation && request.relation->empty())) {
    return failure(kErrBadArity, request.request_id);
  }
  ToolResult result = execute(graph, *verb, request.entity, request.relation.value_or(""), cap);
  ToolReply reply;
  reply.ok = true;
  reply.results = std::move(result.lines);
  reply.truncated = result.truncated;
  reply.request_id = request.request_id;
  return reply;
}

std::string handle_body(const KnowledgeGraph& graph, std::string_view body, std::size_t cap) {
  ToolRequest request;
  try {
    request = request_from_json(body);
  } catch (const DataError&) {
    // Salvage the request id when the object itself parsed.
    std::optional<std::string> id;
    json obj = json::parse(body.begin(), body.end(), nullptr, false);
    if (obj.is_object()) {
      auto it = obj.find("request_id");
      if (it != obj.end() && it->is_string()) id = it->get<std::string>();
    }
    return to_json(failure(kErrBadRequest, id));
  }
  return to_json(handle_request(graph, request, cap));
}

std::string to_json(const ToolRequest& request) {
  json obj = {{"verb", request.verb}, {"entity", request.entity}};
  if (request.relation) obj["relation"] = *request.relation;
  if (request.request_id) obj["request_id"] = *request.request_id;
  return obj.dump();
}

std::string to_json(const ToolReply& reply) {
  json obj = {{"ok", reply.ok}, {"results", reply.results}, {"truncated", reply.truncated}};
  if (reply.error) obj["error"] = *reply.error;
  if (reply.request_id) obj["request_id"] = *reply.request_id;
  return obj.dump();
}

ToolRequest request_from_json(std::string_view body) {
  const json obj = parse_object(body);
  ToolRequest request;
  auto verb = optional_string(obj, "verb");
  auto entity = optional_string(obj, "entity");
  if (!verb || !entity) throw DataError("request needs string \"verb\" and \"entity\"");
  request.verb = std::move(*verb);
  request.entity = std::move(*entity);
  request.relation = optional_string(obj, "relation");
  request.request_id = optional_string(obj, "request_id");
  return request;
}

ToolReply reply_from_json(std::string_view body) {
  const json obj = parse_object(body);
  ToolReply reply;
  try {
    reply.ok = obj.at("ok").get<bool>();
    reply.results = obj.at("results").get<std::vector<std::string>>();
    reply.truncated = obj.at("truncated").get<bool>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed reply: ") + e.what());
  }
  reply.error = optional_string(obj, "error");
  reply.request_id = optional_string(obj, "request_id");
  return reply;
}

std::string encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) throw UsageError("frame payload too large");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out += static_cast<char>((n >> 24) & 0xFF);
  out += static_cast<char>((n >> 16) & 0xFF);
  out += static_cast<char>((n >> 8) & 0xFF);
  out += static_cast<char>(n & 0xFF);
  out += payload;
  return out;
}

void FrameDecoder::feed(std::string_view bytes) {
  if (offset_ > 0 && offset_ >= buffer_.size() / 2) {
    buffer_.erase(0, offset_);
    offset_ = 0;
  }
  buffer_ += bytes;
  if (buffer_.size() - offset_ >= 4) {
    const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + offset_);
    const std::size_t len = (std::size_t{p[0]} << 24) | (std::size_t{p[1]} << 16) |
                            (std::size_t{p[2]} << 8) | std::size_t{p[3]};
    if (len > kMaxFrameBytes) throw DataError("frame length " + std::to_string(len) + " exceeds limit");
  }
}

std::optional<std::string> FrameDecoder::next() {
  if (buffer_.size() - offset_ < 4) return std::nullopt;
  const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + offset_);
  const std::size_t len = (std::size_t{p[0]} << 24) | (std::size_t{p[1]} << 16) |
                          (std::size_t{p[2]} << 8) | std::size_t{p[3]};
  if (len > kMaxFrameBytes) throw DataError("frame length " + std::to_string(len) + " exceeds limit");
  if (buffer_.size() - offset_ - 4 < len) return std::nullopt;
  std::string payload = buffer_.substr(offset_ + 4, len);
  offset_ += 4 + len;
  if (offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  return payload;
}

ToolClient::ToolClient(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0)
    throw Error("cannot resolve " + host + ": " + ::gai_strerror(rc));
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(found);
  if (fd_ < 0) throw Error("cannot connect to " + host + ":" + service);
}

ToolClient::~ToolClient() {
  if (fd_ >= 0) ::close(fd_);
}

ToolReply ToolClient::call(const ToolRequest& request) {
  send(request);
  return receive();
}

void ToolClient::send(const ToolRequest& request) { send_raw(to_json(request)); }

void ToolClient::send_raw(std::string_view body) { write_all(fd_, encode_frame(body)); }

std::string ToolClient::receive_raw() {
  char chunk[8192];
  while (true) {
    if (auto frame = decoder_.next()) return std::move(*frame);
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error("connection closed before a full reply arrived");
    decoder_.feed({chunk, static_cast<std::size_t>(n)});
  }
}

ToolReply ToolClient::receive() { return reply_from_json(receive_raw()); }

std::pair<std::string, std::uint16_t> parse_address(std::string_view addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string_view::npos || colon + 1 == addr.size())
    throw UsageError("address must look like host:port, got '" + std::string(addr) + "'");
  std::string host(addr.substr(0, colon));
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  if (host.empty()) host = "0.0.0.0";
  unsigned port = 0;
  const auto digits = addr.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || port > 65535)
    throw UsageError("bad port in address '" + std::string(addr) + "'");
  return {std::move(host), static_cast<std::uint16_t>(port)};
}

}  // namespace kgtool
