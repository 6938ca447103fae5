#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "stegolab/bits.hpp"
#include "stegolab/error.hpp"
#include "stegolab/mq/config.hpp"
#include "stegolab/mq/frame.hpp"
#include "stegolab/mq/record_log.hpp"
#include "stegolab/mq/scheme.hpp"

namespace stegolab::mq {

class BackpressureError : public Error {
 public:
  using Error::Error;
};

class UnknownApp : public Error {
 public:
  using Error::Error;
};

enum class Direction : std::uint8_t { outbound = 'O', inbound = 'I' };

struct QueueRecord {
  std::uint64_t seq = 0;
  Direction direction = Direction::outbound;
  Bytes payload;
  std::uint64_t created_at = 0;
};

struct AppStatus {
  std::size_t out_depth = 0;
  std::size_t in_depth = 0;
  std::uint64_t out_counter = 0;
  std::uint64_t in_counter = 0;
  std::uint64_t out_next_seq = 0;
  std::uint64_t in_next_seq = 0;
  std::uint64_t skipped = 0;
};

struct RecoveryReport {
  std::size_t quarantined_bytes = 0;
  std::vector<std::string> quarantine_files;
};

/// Per-application stegotext (outbound) and hiddentext (inbound) queues with
/// one scheme session per app and direction.
///
/// Every mutation is logged before it becomes visible: the advanced session
/// state first, then the queue records, then memory. A crash can therefore
/// lose blocks whose counter values were already spent, but never reuse one.
class Broker {
 public:
  /// Opens or creates the persistence directory and recovers its state.
  explicit Broker(BrokerConfig config);
  ~Broker();
  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  /// Encodes and enqueues; returns the number of blocks. All-or-nothing:
  /// throws BackpressureError when the blocks do not fit.
  std::uint32_t publish(std::string_view app, const Bytes& hiddentext);
  /// Removes up to `max` stegotext blocks from the head of the queue.
  std::vector<QueueRecord> consume(std::string_view app, std::size_t max);
  /// Decodes blocks from the peer and enqueues every completed hiddentext.
  /// On error the session is left as it was.
  DecodeCounts decode_incoming(std::string_view app, const std::vector<Bytes>& blocks);
  /// Removes up to `max` hiddentexts from the head of the queue.
  std::vector<QueueRecord> retrieve(std::string_view app, std::size_t max);

  AppStatus app_status(std::string_view app);
  /// `key=value` lines for the broker and one app.
  std::string status_text(std::string_view app);

  std::vector<std::string> apps() const;
  const BrokerConfig& config() const { return config_; }
  const RecoveryReport& recovery() const { return recovery_; }

 private:
  struct Queue {
    std::deque<QueueRecord> items;
    std::uint64_t next_seq = 1;
    std::string path;
    std::unique_ptr<RecordLog> log;
    std::size_t dequeues_since_compaction = 0;
  };
  struct Side {
    std::mutex mu;
    Direction direction;
    SessionState state;
    std::unique_ptr<SchemeCodec> codec;
    Queue queue;
  };
  struct App {
    std::string name;
    Side out;
    Side in;
    std::uint64_t skipped = 0;
  };

  App& app(std::string_view name);
  void recover();
  void load_queue(Side& side, const std::string& app);
  void persist_session(const std::string& app, const Side& side, const SessionState& state);
  void enqueue(Side& side, std::vector<Bytes> payloads);
  std::vector<QueueRecord> dequeue(Side& side, std::size_t max);
  void maybe_compact(Side& side);

  BrokerConfig config_;
  std::map<std::string, std::unique_ptr<App>, std::less<>> apps_;
  std::mutex session_log_mu_;
  std::unique_ptr<RecordLog> session_log_;
  std::atomic<std::uint64_t> clock_{0};
  RecoveryReport recovery_;
};

}  // namespace stegolab::mq
