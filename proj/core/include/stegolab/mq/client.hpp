#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stegolab/mq/frame.hpp"

namespace stegolab::mq {

/// An error reply from the broker.
class RemoteError : public Error {
 public:
  using Error::Error;
};

/// Blocking client for one connection. Not thread-safe; use one per thread.
class Client {
 public:
  explicit Client(const std::string& socket_path);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  /// Sends a request and returns the reply. Throws RemoteError for an error
  /// reply and ProtocolError for a reply that does not match the request.
  Frame call(const Frame& request);

  std::uint32_t publish(std::string_view app, const Bytes& hiddentext);
  std::vector<Record> consume(std::string_view app, std::uint32_t max);
  DecodeCounts decode(std::string_view app, const std::vector<Bytes>& blocks);
  std::vector<Record> retrieve(std::string_view app, std::uint32_t max);
  std::string status(std::string_view app);

 private:
  int fd_ = -1;
  Bytes buffer_;
};

}  // namespace stegolab::mq
