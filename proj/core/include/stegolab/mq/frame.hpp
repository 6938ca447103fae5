#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stegolab/bits.hpp"
#include "stegolab/error.hpp"

namespace stegolab::mq {

class ProtocolError : public Error {
 public:
  using Error::Error;
};

enum class Opcode : std::uint8_t {
  publish = 0x01,
  consume = 0x02,
  decode = 0x03,
  retrieve = 0x04,
  status = 0x05,
  error = 0x7F,
};

inline constexpr std::uint8_t kMagic[2] = {0x53, 0x4D};
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::uint8_t kReplyBit = 0x80;
inline constexpr std::size_t kMaxAppIdBytes = 64;
inline constexpr std::uint32_t kMaxPayloadBytes = 64u << 20;
/// Magic, version, opcode and app-id length.
inline constexpr std::size_t kFixedHeaderBytes = 5;

/// Throws ProtocolError unless `app` is 1 to 64 bytes of UTF-8 without NUL.
void validate_app_id(std::string_view app);

/// One frame: `opcode` is the raw octet, so replies carry the high bit.
struct Frame {
  std::uint8_t opcode = 0;
  std::string app;
  Bytes payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

bool is_reply(std::uint8_t opcode);
/// The request opcode for a raw opcode octet, or nullopt when unknown.
std::optional<Opcode> request_opcode(std::uint8_t opcode);

Frame make_request(Opcode op, std::string app, Bytes payload);
Frame make_reply(Opcode op, std::string app, Bytes payload);
/// Error replies may carry an empty app id when the request's was unusable.
Frame make_error(std::string app, std::string_view reason);

Bytes encode_frame(const Frame& frame);
/// Decodes exactly one frame occupying all of `data`.
Frame decode_frame(std::span<const std::uint8_t> data);
/// Decodes a frame from the front of `buffer` when one is complete, and
/// erases it. Throws ProtocolError as soon as the header is invalid.
std::optional<Frame> take_frame(Bytes& buffer);

// ---------------------------------------------------------------------------
// Payload codecs.

struct Record {
  std::uint64_t seq = 0;
  Bytes data;
  friend bool operator==(const Record&, const Record&) = default;
};

struct DecodeCounts {
  std::uint32_t enqueued = 0;
  std::uint32_t skipped = 0;
  friend bool operator==(const DecodeCounts&, const DecodeCounts&) = default;
};

/// u32 big-endian.
Bytes encode_count(std::uint32_t n);
std::uint32_t decode_count(std::span<const std::uint8_t> payload);

/// [u32 count] then per item [u32 len][bytes].
Bytes encode_blobs(const std::vector<Bytes>& items);
std::vector<Bytes> decode_blobs(std::span<const std::uint8_t> payload);

/// [u32 count] then per record [u64 seq][u32 len][bytes].
Bytes encode_records(const std::vector<Record>& records);
std::vector<Record> decode_records(std::span<const std::uint8_t> payload);

/// [u32 enqueued][u32 skipped].
Bytes encode_decode_counts(const DecodeCounts& counts);
DecodeCounts decode_decode_counts(std::span<const std::uint8_t> payload);

// ---------------------------------------------------------------------------
// Big-endian helpers shared with the persistence layer.

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void bytes(std::span<const std::uint8_t> data) { out_.insert(out_.end(), data.begin(), data.end()); }
  void str(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

/// Bounds-checked reader; throws ProtocolError on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  std::span<const std::uint8_t> bytes(std::size_t n);
  std::size_t remaining() const { return data_.size() - pos_; }
  /// Throws ProtocolError when bytes are left over.
  void expect_end(std::string_view what) const;

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace stegolab::mq
