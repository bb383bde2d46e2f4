// SPDX-License-Identifier: Apache-2.0
#include "kgtool/server.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include "httplib.h"
#include "kgtool/error.hpp"
#include "kgtool/wire.hpp"

namespace kgtool {

namespace {

int bind_listener(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0)
    throw Error("cannot resolve " + host + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = found; ai != nullptr && fd < 0; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
      ::close(fd);
      fd = -1;
    }
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw Error("cannot listen on " + host + ":" + service + ": " + std::strerror(errno));
  return fd;
}

std::uint16_t local_port(int fd) {
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return 0;
  if (addr.ss_family == AF_INET) return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  if (addr.ss_family == AF_INET6) return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  return 0;
}

bool write_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

struct ToolServer::Impl {
  KnowledgeGraph graph;
  ServerOptions options;
  int listener = -1;
  std::uint16_t bound_port = 0;
  std::thread acceptor;
  std::mutex mu;
  std::condition_variable stopped_cv;
  bool stopping = false;
  std::set<int> connections;
  std::vector<std::thread> workers;

  void serve_connection(int fd) {
    FrameDecoder decoder;
    char chunk[16384];
    while (true) {
      const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      try {
        decoder.feed({chunk, static_cast<std::size_t>(n)});
        std::string out;
        while (auto frame = decoder.next()) {
          out += encode_frame(handle_body(graph, *frame, options.cap));
        }
        if (!out.empty() && !write_all(fd, out)) break;
      } catch (const DataError&) {
        // Oversized frame: the stream cannot be resynchronized.
        break;
      }
    }
    std::lock_guard lock(mu);
    if (connections.erase(fd) > 0) ::close(fd);
  }

  void accept_loop() {
    while (true) {
      const int fd = ::accept(listener, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        return;
      }
      std::lock_guard lock(mu);
      if (stopping) {
        ::close(fd);
        return;
      }
      connections.insert(fd);
      workers.emplace_back([this, fd] { serve_connection(fd); });
    }
  }
};

ToolServer::ToolServer(KnowledgeGraph graph, ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->graph = std::move(graph);
  impl_->options = std::move(options);
}

ToolServer::~ToolServer() { stop(); }

void ToolServer::start() {
  if (impl_->listener >= 0) throw UsageError("server already started");
  impl_->listener = bind_listener(impl_->options.host, impl_->options.port);
  impl_->bound_port = local_port(impl_->listener);
  impl_->acceptor = std::thread([this] { impl_->accept_loop(); });
}

std::uint16_t ToolServer::port() const { return impl_->bound_port; }

void ToolServer::stop() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(impl_->mu);
    if (impl_->stopping || impl_->listener < 0) return;
    impl_->stopping = true;
    ::shutdown(impl_->listener, SHUT_RDWR);
    for (int fd : impl_->connections) ::shutdown(fd, SHUT_RDWR);
  }
  if (impl_->acceptor.joinable()) impl_->acceptor.join();
  {
    std::lock_guard lock(impl_->mu);
    workers.swap(impl_->workers);
  }
  for (auto& w : workers) w.join();
  ::close(impl_->listener);
  impl_->stopped_cv.notify_all();
}

void ToolServer::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopping; });
}

struct HttpToolServer::Impl {
  KnowledgeGraph graph;
  ServerOptions options;
  httplib::Server server;
  std::thread runner;
  int bound_port = 0;
};

HttpToolServer::HttpToolServer(KnowledgeGraph graph, ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->graph = std::move(graph);
  impl_->options = std::move(options);
  impl_->server.Post("/v1/tool", [this](const httplib::Request& req, httplib::Response& res) {
    res.set_content(handle_body(impl_->graph, req.body, impl_->options.cap), "application/json");
  });
}

HttpToolServer::~HttpToolServer() { stop(); }

void HttpToolServer::start() {
  auto& s = impl_->server;
  const auto& o = impl_->options;
  if (o.port == 0) {
    impl_->bound_port = s.bind_to_any_port(o.host);
  } else if (s.bind_to_port(o.host, o.port)) {
    impl_->bound_port = o.port;
  }
  if (impl_->bound_port <= 0) throw Error("cannot listen on " + o.host + ":" + std::to_string(o.port));
  impl_->runner = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

std::uint16_t HttpToolServer::port() const { return static_cast<std::uint16_t>(impl_->bound_port); }

void HttpToolServer::stop() {
  impl_->server.stop();
  if (impl_->runner.joinable()) impl_->runner.join();
}

void HttpToolServer::wait() {
  if (impl_->runner.joinable()) impl_->runner.join();
}

}  // namespace kgtool
