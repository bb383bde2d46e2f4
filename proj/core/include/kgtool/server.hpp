// SPDX-License-Identifier: Apache-2.0
#pragma once

// Tool-API servers. Both share one immutable graph and keep no state between
// requests; the per-question call budget is the client's business.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include "kgtool/graph.hpp"

namespace kgtool {

struct ServerOptions {
  std::string host = "127.0.0.1";
  /// 0 picks an ephemeral port; read it back with port().
  std::uint16_t port = 0;
  std::size_t cap = kDefaultResultCap;
};

/// Length-prefixed JSON over TCP, one thread per connection.
class ToolServer {
 public:
  ToolServer(KnowledgeGraph graph, ServerOptions options);
  ~ToolServer();
  ToolServer(const ToolServer&) = delete;
  ToolServer& operator=(const ToolServer&) = delete;

  /// Binds and starts accepting in a background thread. Throws Error when the
  /// address cannot be bound.
  void start();
  std::uint16_t port() const;
  /// Closes the listener and every open connection, then joins all threads.
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// The same JSON bodies over HTTP: POST /v1/tool with a request object,
/// answered with the reply object.
class HttpToolServer {
 public:
  HttpToolServer(KnowledgeGraph graph, ServerOptions options);
  ~HttpToolServer();
  HttpToolServer(const HttpToolServer&) = delete;
  HttpToolServer& operator=(const HttpToolServer&) = delete;

  void start();
  std::uint16_t port() const;
  void stop();
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kgtool
