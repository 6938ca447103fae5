#include "stegolab/mq/client.hpp"

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace stegolab::mq {

Client::Client(const std::string& socket_path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (socket_path.size() >= sizeof(addr.sun_path)) throw InvalidArgument("socket path too long");
  std::memcpy(addr.sun_path, socket_path.c_str(), socket_path.size() + 1);
  fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw Error("cannot connect to " + socket_path + ": " + err);
  }
}

Client::~Client() {
  if (fd_ >= 0) ::close(fd_);
}

Frame Client::call(const Frame& request) {
  const Bytes out = encode_frame(request);
  std::size_t off = 0;
  while (off < out.size()) {
    const ssize_t n = ::send(fd_, out.data() + off, out.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(std::string("send: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }

  std::uint8_t chunk[65536];
  while (true) {
    if (auto reply = take_frame(buffer_)) {
      if (reply->opcode == static_cast<std::uint8_t>(Opcode::error)) {
        throw RemoteError(std::string(reply->payload.begin(), reply->payload.end()));
      }
      if (reply->opcode != (request.opcode | kReplyBit)) {
        throw ProtocolError("reply opcode " + std::to_string(reply->opcode) +
                            " does not match request");
      }
      return *reply;
    }
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) throw Error(std::string("recv: ") + std::strerror(errno));
    if (n == 0) throw ProtocolError("broker closed the connection");
    buffer_.insert(buffer_.end(), chunk, chunk + n);
  }
}

std::uint32_t Client::publish(std::string_view app, const Bytes& hiddentext) {
  return decode_count(call(make_request(Opcode::publish, std::string(app), hiddentext)).payload);
}

std::vector<Record> Client::consume(std::string_view app, std::uint32_t max) {
  return decode_records(
      call(make_request(Opcode::consume, std::string(app), encode_count(max))).payload);
}

DecodeCounts Client::decode(std::string_view app, const std::vector<Bytes>& blocks) {
  return decode_decode_counts(
      call(make_request(Opcode::decode, std::string(app), encode_blobs(blocks))).payload);
}

std::vector<Record> Client::retrieve(std::string_view app, std::uint32_t max) {
  return decode_records(
      call(make_request(Opcode::retrieve, std::string(app), encode_count(max))).payload);
}

std::string Client::status(std::string_view app) {
  const Frame reply = call(make_request(Opcode::status, std::string(app), {}));
  return std::string(reply.payload.begin(), reply.payload.end());
}

}  // namespace stegolab::mq
