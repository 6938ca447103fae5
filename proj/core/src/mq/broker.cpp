#include "stegolab/mq/broker.hpp"

#include <filesystem>
#include <sstream>

#include "stegolab/crypto.hpp"

namespace stegolab::mq {

namespace fs = std::filesystem;

namespace {

enum RecordType : std::uint8_t { kEnqueue = 'E', kDequeue = 'D', kWatermark = 'W' };

constexpr std::size_t kCompactAfter = 1024;

Bytes enqueue_record(const QueueRecord& r) {
  ByteWriter w;
  w.u8(kEnqueue);
  w.u64(r.seq);
  w.u64(r.created_at);
  w.u32(static_cast<std::uint32_t>(r.payload.size()));
  w.bytes(r.payload);
  return w.take();
}

Bytes seq_record(RecordType type, std::uint64_t seq) {
  ByteWriter w;
  w.u8(type);
  w.u64(seq);
  return w.take();
}

Bytes session_record(const std::string& app, Direction dir, const SessionState& state) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(dir));
  w.u8(static_cast<std::uint8_t>(app.size()));
  w.str(app);
  w.bytes(state.serialize());
  return w.take();
}

std::string queue_file(const std::string& dir, const std::string& app, Direction d) {
  const std::string hex = to_hex(std::span(reinterpret_cast<const std::uint8_t*>(app.data()),
                                           app.size()));
  return (fs::path(dir) / ("queue-" + hex + (d == Direction::outbound ? "-out" : "-in") + ".log"))
      .string();
}

}  // namespace

Broker::Broker(BrokerConfig config) : config_(std::move(config)) {
  config_.validate();
  const SymmetricKey out_key = load_key_file(config_.key_file, kAesBlockBytes);
  const SymmetricKey in_key = load_key_file(config_.peer_key_file, kAesBlockBytes);
  for (const auto& name : config_.apps) {
    auto a = std::make_unique<App>();
    a->name = name;
    a->out.direction = Direction::outbound;
    a->in.direction = Direction::inbound;
    a->out.codec = make_codec(config_, app_key(out_key, name));
    a->in.codec = make_codec(config_, app_key(in_key, name));
    a->out.state.counter = config_.counter_start;
    a->in.state.counter = config_.peer_counter_start;
    apps_.emplace(name, std::move(a));
  }
  recover();
}

Broker::~Broker() = default;

Broker::App& Broker::app(std::string_view name) {
  auto it = apps_.find(name);
  if (it == apps_.end()) throw UnknownApp("unknown app '" + std::string(name) + "'");
  return *it->second;
}

std::vector<std::string> Broker::apps() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : apps_) out.push_back(name);
  return out;
}

void Broker::recover() {
  fs::create_directories(config_.persistence_dir);
  const std::string session_path = (fs::path(config_.persistence_dir) / "sessions.log").string();

  auto loaded = RecordLog::load(session_path);
  if (loaded.quarantined_bytes) {
    recovery_.quarantined_bytes += loaded.quarantined_bytes;
    recovery_.quarantine_files.push_back(loaded.quarantine_path);
  }
  for (const auto& body : loaded.records) {
    ByteReader r(body);
    const auto dir = static_cast<Direction>(r.u8());
    const auto name_bytes = r.bytes(r.u8());
    const std::string name(name_bytes.begin(), name_bytes.end());
    auto it = apps_.find(name);
    if (it == apps_.end()) continue;  // app removed from the config
    Side& side = dir == Direction::outbound ? it->second->out : it->second->in;
    SessionState state = SessionState::parse(r.bytes(r.remaining()));
    // Never step a counter backwards, whatever order the records are in.
    if (state.counter >= side.state.counter) side.state = std::move(state);
  }

  for (auto& [name, a] : apps_) {
    load_queue(a->out, name);
    load_queue(a->in, name);
  }

  std::vector<Bytes> compacted;
  for (auto& [name, a] : apps_) {
    compacted.push_back(session_record(name, Direction::outbound, a->out.state));
    compacted.push_back(session_record(name, Direction::inbound, a->in.state));
  }
  RecordLog::rewrite(session_path, compacted);
  session_log_ = std::make_unique<RecordLog>(session_path, config_.fsync);
}

void Broker::load_queue(Side& side, const std::string& app) {
  Queue& q = side.queue;
  q.path = queue_file(config_.persistence_dir, app, side.direction);
  auto loaded = RecordLog::load(q.path);
  if (loaded.quarantined_bytes) {
    recovery_.quarantined_bytes += loaded.quarantined_bytes;
    recovery_.quarantine_files.push_back(loaded.quarantine_path);
  }
  std::uint64_t head_done = 0;
  for (const auto& body : loaded.records) {
    ByteReader r(body);
    const auto type = r.u8();
    const auto seq = r.u64();
    if (type == kEnqueue) {
      QueueRecord rec;
      rec.seq = seq;
      rec.direction = side.direction;
      rec.created_at = r.u64();
      const auto data = r.bytes(r.u32());
      rec.payload.assign(data.begin(), data.end());
      clock_ = std::max(clock_.load(), rec.created_at);
      if (seq > head_done && (q.items.empty() || seq > q.items.back().seq)) {
        q.items.push_back(std::move(rec));
      }
      q.next_seq = std::max(q.next_seq, seq + 1);
    } else if (type == kDequeue) {
      head_done = std::max(head_done, seq);
      while (!q.items.empty() && q.items.front().seq <= seq) q.items.pop_front();
      q.next_seq = std::max(q.next_seq, seq + 1);
    } else if (type == kWatermark) {
      q.next_seq = std::max(q.next_seq, seq);
    } else {
      throw StorageError("unknown record type in " + q.path);
    }
  }

  std::vector<Bytes> compacted{seq_record(kWatermark, q.next_seq)};
  for (const auto& rec : q.items) compacted.push_back(enqueue_record(rec));
  RecordLog::rewrite(q.path, compacted);
  q.log = std::make_unique<RecordLog>(q.path, config_.fsync);
}

void Broker::persist_session(const std::string& app, const Side& side,
                             const SessionState& state) {
  std::lock_guard lock(session_log_mu_);
  session_log_->append(session_record(app, side.direction, state));
}

void Broker::enqueue(Side& side, std::vector<Bytes> payloads) {
  Queue& q = side.queue;
  std::vector<QueueRecord> records;
  std::vector<Bytes> bodies;
  records.reserve(payloads.size());
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    QueueRecord rec{q.next_seq + i, side.direction, std::move(payloads[i]), ++clock_};
    bodies.push_back(enqueue_record(rec));
    records.push_back(std::move(rec));
  }
  q.log->append(bodies);
  q.next_seq += records.size();
  for (auto& rec : records) q.items.push_back(std::move(rec));
}

std::vector<QueueRecord> Broker::dequeue(Side& side, std::size_t max) {
  Queue& q = side.queue;
  const std::size_t n = std::min(max, q.items.size());
  if (n == 0) return {};
  q.log->append(seq_record(kDequeue, q.items[n - 1].seq));
  std::vector<QueueRecord> out(std::make_move_iterator(q.items.begin()),
                               std::make_move_iterator(q.items.begin() +
                                                       static_cast<std::ptrdiff_t>(n)));
  q.items.erase(q.items.begin(), q.items.begin() + static_cast<std::ptrdiff_t>(n));
  q.dequeues_since_compaction += n;
  maybe_compact(side);
  return out;
}

void Broker::maybe_compact(Side& side) {
  Queue& q = side.queue;
  if (!q.items.empty() || q.dequeues_since_compaction < kCompactAfter) return;
  q.log.reset();
  RecordLog::rewrite(q.path, {seq_record(kWatermark, q.next_seq)});
  q.log = std::make_unique<RecordLog>(q.path, config_.fsync);
  q.dequeues_since_compaction = 0;
}

std::uint32_t Broker::publish(std::string_view name, const Bytes& hiddentext) {
  if (hiddentext.empty()) throw InvalidArgument("empty hiddentext");
  App& a = app(name);
  Side& side = a.out;
  std::lock_guard lock(side.mu);

  SessionState next = side.state;
  std::vector<Bytes> blocks;
  try {
    blocks = side.codec->encode(next, hiddentext);
  } catch (const InvalidArgument&) {
    throw;
  } catch (const Error& e) {
    throw SchemeError("encoding failed: " + std::string(e.what()));
  }
  if (side.queue.items.size() + blocks.size() > config_.max_queue_depth) {
    throw BackpressureError("stegotext queue of '" + a.name + "' is full (" +
                            std::to_string(side.queue.items.size()) + " of " +
                            std::to_string(config_.max_queue_depth) + " blocks, " +
                            std::to_string(blocks.size()) + " needed)");
  }
  // Once the advanced state is durable the old one must never be used again,
  // even if the queue append below fails.
  persist_session(a.name, side, next);
  side.state = std::move(next);
  const auto count = static_cast<std::uint32_t>(blocks.size());
  enqueue(side, std::move(blocks));
  return count;
}

std::vector<QueueRecord> Broker::consume(std::string_view name, std::size_t max) {
  Side& side = app(name).out;
  std::lock_guard lock(side.mu);
  return dequeue(side, max);
}

DecodeCounts Broker::decode_incoming(std::string_view name, const std::vector<Bytes>& blocks) {
  App& a = app(name);
  Side& side = a.in;
  std::lock_guard lock(side.mu);

  SessionState next = side.state;
  DecodeOutput out = side.codec->decode(next, blocks);
  if (side.queue.items.size() + out.messages.size() > config_.max_queue_depth) {
    throw BackpressureError("hiddentext queue of '" + a.name + "' is full");
  }
  persist_session(a.name, side, next);
  side.state = std::move(next);
  a.skipped += out.skipped;
  const DecodeCounts counts{static_cast<std::uint32_t>(out.messages.size()), out.skipped};
  enqueue(side, std::move(out.messages));
  return counts;
}

std::vector<QueueRecord> Broker::retrieve(std::string_view name, std::size_t max) {
  Side& side = app(name).in;
  std::lock_guard lock(side.mu);
  return dequeue(side, max);
}

AppStatus Broker::app_status(std::string_view name) {
  App& a = app(name);
  AppStatus s;
  {
    std::lock_guard lock(a.out.mu);
    s.out_depth = a.out.queue.items.size();
    s.out_counter = a.out.state.counter;
    s.out_next_seq = a.out.queue.next_seq;
  }
  {
    std::lock_guard lock(a.in.mu);
    s.in_depth = a.in.queue.items.size();
    s.in_counter = a.in.state.counter;
    s.in_next_seq = a.in.queue.next_seq;
    s.skipped = a.skipped;
  }
  return s;
}

std::string Broker::status_text(std::string_view name) {
  const AppStatus s = app_status(name);
  std::ostringstream os;
  os << "scheme=" << to_string(config_.scheme) << "\n"
     << "apps=" << apps_.size() << "\n"
     << "max_queue_depth=" << config_.max_queue_depth << "\n"
     << "quarantined_bytes=" << recovery_.quarantined_bytes << "\n"
     << "app=" << name << "\n"
     << "out_depth=" << s.out_depth << "\n"
     << "out_counter=" << s.out_counter << "\n"
     << "out_next_seq=" << s.out_next_seq << "\n"
     << "in_depth=" << s.in_depth << "\n"
     << "in_counter=" << s.in_counter << "\n"
     << "in_next_seq=" << s.in_next_seq << "\n"
     << "skipped=" << s.skipped << "\n";
  return os.str();
}

}  // namespace stegolab::mq
