#include "stegolab/mq/server.hpp"

#include <sys/socket.h>
#include <sys/stat.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace stegolab::mq {

namespace {

std::vector<Record> to_wire(const std::vector<QueueRecord>& records) {
  std::vector<Record> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.seq, r.payload});
  return out;
}

bool send_all(int fd, const Bytes& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

Frame handle_request(Broker& broker, const Frame& request) {
  try {
    if (is_reply(request.opcode)) throw ProtocolError("a reply frame is not a request");
    const auto op = request_opcode(request.opcode);
    if (!op) throw ProtocolError("unknown opcode");
    switch (*op) {
      case Opcode::publish: {
        const std::uint32_t n = broker.publish(request.app, request.payload);
        return make_reply(*op, request.app, encode_count(n));
      }
      case Opcode::consume: {
        const std::uint32_t max = decode_count(request.payload);
        return make_reply(*op, request.app,
                          encode_records(to_wire(broker.consume(request.app, max))));
      }
      case Opcode::decode: {
        const auto counts = broker.decode_incoming(request.app, decode_blobs(request.payload));
        return make_reply(*op, request.app, encode_decode_counts(counts));
      }
      case Opcode::retrieve: {
        const std::uint32_t max = decode_count(request.payload);
        return make_reply(*op, request.app,
                          encode_records(to_wire(broker.retrieve(request.app, max))));
      }
      case Opcode::status: {
        const std::string text = broker.status_text(request.app);
        return make_reply(*op, request.app, Bytes(text.begin(), text.end()));
      }
      case Opcode::error:
        break;
    }
    throw ProtocolError("unsupported opcode");
  } catch (const std::exception& e) {
    return make_error(request.app, e.what());
  }
}

Server::Server(Broker& broker, std::string socket_path)
    : broker_(broker), path_(std::move(socket_path)) {}

Server::~Server() { stop(); }

void Server::start() {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path_.size() >= sizeof(addr.sun_path)) throw InvalidArgument("socket path too long");
  std::memcpy(addr.sun_path, path_.c_str(), path_.size() + 1);

  struct stat st{};
  if (::lstat(path_.c_str(), &st) == 0) {
    if (!S_ISSOCK(st.st_mode)) throw InvalidArgument(path_ + " exists and is not a socket");
    ::unlink(path_.c_str());
  }
  listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 64) != 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error("cannot listen on " + path_ + ": " + err);
  }
  stopping_ = false;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void Server::stop() {
  if (listen_fd_ < 0) return;
  stopping_ = true;
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  {
    std::lock_guard lock(mu_);
    for (auto& c : connections_) ::shutdown(c->fd, SHUT_RDWR);
  }
  for (auto& c : connections_) {
    if (c->thread.joinable()) c->thread.join();
    ::close(c->fd);
  }
  connections_.clear();
  ::unlink(path_.c_str());
}

void Server::accept_loop() {
  while (!stopping_) {
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;
    }
    std::lock_guard lock(mu_);
    reap_finished();
    if (stopping_) {
      ::close(fd);
      break;
    }
    auto conn = std::make_unique<Connection>();
    conn->fd = fd;
    Connection* raw = conn.get();
    connections_.push_back(std::move(conn));
    raw->thread = std::thread([this, raw] { serve(*raw); });
  }
}

void Server::reap_finished() {
  for (auto it = connections_.begin(); it != connections_.end();) {
    if ((*it)->done) {
      (*it)->thread.join();
      ::close((*it)->fd);
      it = connections_.erase(it);
    } else {
      ++it;
    }
  }
}

void Server::serve(Connection& conn) {
  Bytes buffer;
  std::uint8_t chunk[65536];
  bool open = true;
  while (open && !stopping_) {
    const ssize_t n = ::recv(conn.fd, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.insert(buffer.end(), chunk, chunk + n);
    try {
      while (auto frame = take_frame(buffer)) {
        if (!send_all(conn.fd, encode_frame(handle_request(broker_, *frame)))) {
          open = false;
          break;
        }
      }
    } catch (const ProtocolError& e) {
      send_all(conn.fd, encode_frame(make_error("", e.what())));
      open = false;
    }
  }
  ::shutdown(conn.fd, SHUT_RDWR);
  conn.done = true;
}

}  // namespace stegolab::mq
