#include "skyshard/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace skyshard::net {

void Socket::reset() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

HostPort parse_address(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos || colon + 1 == address.size()) {
    fail(ErrorCode::BadConfig, "address '" + address + "' is not host:port");
  }
  HostPort hp;
  hp.host = address.substr(0, colon);
  if (hp.host.empty()) hp.host = "0.0.0.0";
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(address.substr(colon + 1), &used);
    if (used != address.size() - colon - 1) throw std::invalid_argument("port");
  } catch (const std::exception&) {
    fail(ErrorCode::BadConfig, "bad port in address '" + address + "'");
  }
  if (port > 65535) fail(ErrorCode::BadConfig, "port out of range in '" + address + "'");
  hp.port = static_cast<std::uint16_t>(port);
  return hp;
}

namespace {

sockaddr_in resolve(const HostPort& hp, ErrorCode on_error) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(hp.port);
  if (::inet_pton(AF_INET, hp.host.c_str(), &sa.sin_addr) == 1) return sa;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(hp.host.c_str(), nullptr, &hints, &res) != 0 || !res) {
    fail(on_error, "cannot resolve host '" + hp.host + "'");
  }
  sa.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return sa;
}

}  // namespace

Socket connect_to(const std::string& address) {
  HostPort hp = parse_address(address);
  sockaddr_in sa = resolve(hp, ErrorCode::NodeUnreachable);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) fail(ErrorCode::IoError, std::string("socket: ") + std::strerror(errno));
  if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
    fail(ErrorCode::NodeUnreachable, "connect " + address + ": " + std::strerror(errno));
  }
  int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s;
}

Socket listen_on(const std::string& address, int backlog) {
  HostPort hp = parse_address(address);
  sockaddr_in sa = resolve(hp, ErrorCode::BadConfig);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) fail(ErrorCode::IoError, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
    if (errno == EADDRINUSE) fail(ErrorCode::AddressInUse, "address " + address + " is already in use");
    fail(ErrorCode::IoError, "bind " + address + ": " + std::strerror(errno));
  }
  if (::listen(s.fd(), backlog) != 0) fail(ErrorCode::IoError, std::string("listen: ") + std::strerror(errno));
  return s;
}

std::uint16_t local_port(const Socket& s) {
  sockaddr_in sa{};
  socklen_t len = sizeof sa;
  ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&sa), &len);
  return ntohs(sa.sin_port);
}

bool read_exact(int fd, std::uint8_t* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    ssize_t r = ::recv(fd, out + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      fail(ErrorCode::NodeUnreachable, "connection closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::NodeUnreachable, std::string("recv: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::NodeUnreachable, std::string("send: ") + std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

// --- client --------------------------------------------------------------

struct Connection::Link {
  Socket sock;
  std::mutex write_mu;
  std::mutex pending_mu;
  std::map<std::uint64_t, std::promise<wire::Frame>> pending;
  bool dead = false;  // guarded by pending_mu
};

Connection::Connection(std::string address, std::size_t max_payload)
    : address_(std::move(address)), max_payload_(max_payload) {}

Connection::~Connection() { close(); }

void Connection::close() {
  std::lock_guard lock(mu_);
  if (link_) link_->sock.shutdown();
  for (auto& t : readers_) t.join();
  readers_.clear();
  link_.reset();
}

std::shared_ptr<Connection::Link> Connection::ensure_link() {
  std::lock_guard lock(mu_);
  if (link_) {
    std::lock_guard pl(link_->pending_mu);
    if (!link_->dead) return link_;
  }
  // Previous reader (if any) has exited or is exiting; it never takes mu_.
  for (auto& t : readers_) t.join();
  readers_.clear();
  auto link = std::make_shared<Link>();
  link->sock = connect_to(address_);
  link_ = link;
  readers_.emplace_back([this, link] { reader_loop(link); });
  return link;
}

void Connection::fail_link(const std::shared_ptr<Link>& link, const std::string& why) {
  std::map<std::uint64_t, std::promise<wire::Frame>> orphans;
  {
    std::lock_guard pl(link->pending_mu);
    link->dead = true;
    orphans.swap(link->pending);
  }
  link->sock.shutdown();
  for (auto& [id, p] : orphans) {
    p.set_exception(std::make_exception_ptr(Error(ErrorCode::NodeUnreachable, address_ + ": " + why)));
  }
}

void Connection::reader_loop(std::shared_ptr<Link> link) {
  std::string why = "connection closed";
  try {
    for (;;) {
      std::uint8_t len_buf[4];
      if (!read_exact(link->sock.fd(), len_buf, 4)) break;
      std::uint32_t length;
      std::memcpy(&length, len_buf, 4);
      if (length < wire::kFrameHeader || length - wire::kFrameHeader > max_payload_) {
        why = "malformed response frame";
        break;
      }
      Bytes body(length);
      if (!read_exact(link->sock.fd(), body.data(), length)) {
        why = "connection closed mid-frame";
        break;
      }
      received_ += 4 + length;
      wire::Frame f;
      std::memcpy(&f.request_id, body.data(), 8);
      f.msg_type = body[8];
      f.payload.assign(body.begin() + wire::kFrameHeader, body.end());
      std::promise<wire::Frame> p;
      {
        std::lock_guard pl(link->pending_mu);
        auto it = link->pending.find(f.request_id);
        if (it == link->pending.end()) continue;
        p = std::move(it->second);
        link->pending.erase(it);
      }
      p.set_value(std::move(f));
    }
  } catch (const std::exception& e) {
    why = e.what();
  }
  fail_link(link, why);
}

std::future<wire::Frame> Connection::send(std::uint8_t msg_type, ByteView payload) {
  wire::Frame f;
  f.request_id = next_request_id();
  f.msg_type = msg_type;
  f.payload.assign(payload.begin(), payload.end());
  Bytes bytes = wire::encode_frame(f, max_payload_);
  return send_raw(f.request_id, bytes);
}

std::future<wire::Frame> Connection::send_raw(std::uint64_t request_id, ByteView bytes) {
  auto link = ensure_link();
  std::future<wire::Frame> fut;
  {
    std::lock_guard pl(link->pending_mu);
    if (link->dead) fail(ErrorCode::NodeUnreachable, address_ + ": connection closed");
    fut = link->pending[request_id].get_future();
  }
  try {
    std::lock_guard wl(link->write_mu);
    write_all(link->sock.fd(), bytes.data(), bytes.size());
    sent_ += bytes.size();
  } catch (const Error& e) {
    fail_link(link, e.what());
  }
  return fut;
}

Bytes Connection::call(std::uint8_t msg_type, ByteView payload) {
  wire::Frame resp = send(msg_type, payload).get();
  if (resp.msg_type != wire::response_type(msg_type)) {
    fail(ErrorCode::BadRequest, "unexpected response type " + std::to_string(resp.msg_type));
  }
  return std::move(resp.payload);
}

// --- server --------------------------------------------------------------

struct FrameServer::Conn {
  Socket sock;
  std::mutex write_mu;
};

Bytes handle_safely(const Handler& handler, std::uint8_t msg_type, ByteView payload) {
  try {
    return handler(msg_type, payload);
  } catch (const ParseError& e) {
    return wire::error_payload(ErrorCode::ParseError,
                               std::string(e.what()) + " (position " + std::to_string(e.position()) + ")");
  } catch (const Error& e) {
    return wire::error_payload(e.code(), e.what());
  } catch (const std::exception& e) {
    return wire::error_payload(ErrorCode::Internal, e.what());
  }
}

FrameServer::FrameServer(std::string address, Handler handler, std::size_t max_payload)
    : host_(parse_address(address).host), handler_(std::move(handler)), max_payload_(max_payload) {
  listener_ = listen_on(address);
  port_ = local_port(listener_);
  acceptor_ = std::thread([this] { accept_loop(); });
}

FrameServer::~FrameServer() { stop(); }

std::string FrameServer::address() const { return host_ + ":" + std::to_string(port_); }

void FrameServer::accept_loop() {
  while (!stopping_) {
    int fd = ::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (stopping_) break;
      if (errno == EINTR || errno == ECONNABORTED) continue;
      if (errno == EMFILE || errno == ENFILE) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
        continue;
      }
      break;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto conn = std::make_shared<Conn>();
    conn->sock = Socket(fd);
    {
      std::lock_guard lock(mu_);
      if (stopping_) break;
      conns_[conn.get()] = conn;
      ++active_;
    }
    std::thread([this, conn] { serve(conn); }).detach();
  }
}

void FrameServer::respond(const std::shared_ptr<Conn>& conn, const wire::Frame& response) {
  Bytes bytes = wire::encode_frame(response, SIZE_MAX);
  std::lock_guard wl(conn->write_mu);
  try {
    write_all(conn->sock.fd(), bytes.data(), bytes.size());
  } catch (const Error&) {
    conn->sock.shutdown();
  }
}

void FrameServer::serve(std::shared_ptr<Conn> conn) {
  wire::FrameDecoder decoder(max_payload_);
  std::vector<std::uint8_t> buf(1 << 16);
  try {
    for (;;) {
      ssize_t n = ::recv(conn->sock.fd(), buf.data(), buf.size(), 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      decoder.feed(ByteView(buf.data(), static_cast<std::size_t>(n)));
      while (auto ev = decoder.next()) {
        if (auto* big = std::get_if<wire::FrameDecoder::Oversized>(&*ev)) {
          wire::Frame resp{big->request_id, wire::response_type(big->msg_type),
                           wire::error_payload(ErrorCode::FrameTooLarge,
                                               "frame length " + std::to_string(big->length) + " exceeds limit")};
          respond(conn, resp);
          continue;
        }
        auto req = std::make_shared<wire::Frame>(std::move(std::get<wire::Frame>(*ev)));
        {
          std::lock_guard lock(mu_);
          ++active_;
        }
        std::thread([this, conn, req] {
          wire::Frame resp{req->request_id, wire::response_type(req->msg_type),
                           handle_safely(handler_, req->msg_type, req->payload)};
          respond(conn, resp);
          std::lock_guard lock(mu_);
          if (--active_ == 0) idle_.notify_all();
        }).detach();
      }
    }
  } catch (const Error&) {
    // unrecoverable framing error: drop the connection
  }
  conn->sock.shutdown();
  std::lock_guard lock(mu_);
  conns_.erase(conn.get());
  if (--active_ == 0) idle_.notify_all();
}

void FrameServer::stop() {
  if (stopping_.exchange(true)) return;
  listener_.shutdown();
  if (acceptor_.joinable()) acceptor_.join();
  std::unique_lock lock(mu_);
  for (auto& [p, c] : conns_) c->sock.shutdown();
  idle_.wait(lock, [&] { return active_ == 0; });
  listener_.reset();
}

}  // namespace skyshard::net
