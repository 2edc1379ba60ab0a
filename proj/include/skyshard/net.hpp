#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <future>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "skyshard/protocol.hpp"

namespace skyshard::net {

/// Owning file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { reset(); }
  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.release();
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() {
    int f = fd_;
    fd_ = -1;
    return f;
  }
  void reset();
  /// shutdown(2) both directions; wakes blocked readers.
  void shutdown();

 private:
  int fd_ = -1;
};

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};
/// "host:port"; throws BadConfig.
HostPort parse_address(const std::string& address);

/// Throws NodeUnreachable.
Socket connect_to(const std::string& address);
/// Throws AddressInUse or IoError.
Socket listen_on(const std::string& address, int backlog = 128);
std::uint16_t local_port(const Socket& s);

/// Returns false on orderly EOF before any byte; throws NodeUnreachable on errors or short reads.
bool read_exact(int fd, std::uint8_t* out, std::size_t n);
void write_all(int fd, const std::uint8_t* data, std::size_t n);

/// Pipelined client connection: any number of requests in flight, responses
/// matched by request_id. Connects lazily and reconnects after a failure.
class Connection {
 public:
  explicit Connection(std::string address, std::size_t max_payload = wire::kMaxPayload);
  ~Connection();
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  const std::string& address() const { return address_; }

  /// Resolves to the response frame; fails with NodeUnreachable if the
  /// connection drops first.
  std::future<wire::Frame> send(std::uint8_t msg_type, ByteView payload);
  /// Sends pre-encoded bytes verbatim, expecting one response with `request_id`.
  std::future<wire::Frame> send_raw(std::uint64_t request_id, ByteView bytes);
  /// Round trip; returns the response payload.
  Bytes call(std::uint8_t msg_type, ByteView payload);
  std::uint64_t next_request_id() { return next_id_.fetch_add(1); }

  void close();

  std::uint64_t bytes_sent() const { return sent_.load(); }
  std::uint64_t bytes_received() const { return received_.load(); }
  void reset_counters() {
    sent_ = 0;
    received_ = 0;
  }

 private:
  struct Link;
  std::shared_ptr<Link> ensure_link();
  void reader_loop(std::shared_ptr<Link> link);
  void fail_link(const std::shared_ptr<Link>& link, const std::string& why);

  std::string address_;
  std::size_t max_payload_;
  std::atomic<std::uint64_t> next_id_{1};
  std::atomic<std::uint64_t> sent_{0};
  std::atomic<std::uint64_t> received_{0};
  std::mutex mu_;
  std::shared_ptr<Link> link_;
  std::list<std::thread> readers_;
};

/// Maps one request frame to a response payload (status + body). Exceptions
/// are converted to error responses by the server.
using Handler = std::function<Bytes(std::uint8_t msg_type, ByteView payload)>;

/// Accepts connections and serves pipelined requests. Each request runs on
/// its own thread so a slow request never blocks others.
class FrameServer {
 public:
  FrameServer(std::string address, Handler handler, std::size_t max_payload = wire::kMaxPayload);
  ~FrameServer();
  FrameServer(const FrameServer&) = delete;
  FrameServer& operator=(const FrameServer&) = delete;

  std::uint16_t port() const { return port_; }
  std::string address() const;
  void stop();

 private:
  struct Conn;
  void accept_loop();
  void serve(std::shared_ptr<Conn> conn);
  void respond(const std::shared_ptr<Conn>& conn, const wire::Frame& response);

  std::string host_;
  Handler handler_;
  std::size_t max_payload_;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;

  std::mutex mu_;
  std::condition_variable idle_;
  std::map<Conn*, std::shared_ptr<Conn>> conns_;
  std::size_t active_ = 0;  // connection readers + request workers
};

/// Wraps `handler` with error-to-status conversion and the unknown-type reply.
Bytes handle_safely(const Handler& handler, std::uint8_t msg_type, ByteView payload);

}  // namespace skyshard::net
