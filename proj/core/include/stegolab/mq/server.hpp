#pragma once

#include <atomic>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "stegolab/mq/broker.hpp"
#include "stegolab/mq/frame.hpp"

namespace stegolab::mq {

/// Executes one request frame against the broker and builds the reply.
/// Never throws for request-level failures; they become error replies.
Frame handle_request(Broker& broker, const Frame& request);

/// Serves the wire protocol on a Unix stream socket, one thread per
/// connection. A malformed frame gets an error reply and the connection is
/// closed, since the byte stream can no longer be trusted.
class Server {
 public:
  Server(Broker& broker, std::string socket_path);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting. A stale socket file at the path is removed.
  void start();
  /// Stops accepting, closes every connection and joins all threads.
  void stop();

  const std::string& socket_path() const { return path_; }

 private:
  struct Connection {
    int fd = -1;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void accept_loop();
  void serve(Connection& conn);
  void reap_finished();

  Broker& broker_;
  std::string path_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::list<std::unique_ptr<Connection>> connections_;
};

}  // namespace stegolab::mq
