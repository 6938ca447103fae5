#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "stegolab/bits.hpp"
#include "stegolab/crypto.hpp"
#include "stegolab/error.hpp"
#include "stegolab/mq/config.hpp"

namespace stegolab::mq {

class SchemeError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint32_t kMaxHiddentextBytes = 16u << 20;

/// Everything a broker must persist about one (app, direction) session.
struct SessionState {
  std::uint64_t counter = 0;
  /// Timestamp of the last emitted block (outbound).
  std::uint64_t tick = 0;
  /// Decoded message bits not yet forming a whole framed message (inbound).
  Bits pending;
  /// Undecoded repetition-code bits (inbound, universal only).
  Bits raw;
  /// Last emitted block, the history for Markov channels (outbound, universal).
  std::optional<Bits> last_block;

  Bytes serialize() const;
  static SessionState parse(std::span<const std::uint8_t> data);
  friend bool operator==(const SessionState&, const SessionState&) = default;
};

/// Message framing on the bit level: u32 big-endian byte length, the
/// hiddentext, then a 1 bit and zeros up to a multiple of `unit`.
Bits frame_message(const Bytes& hiddentext, std::size_t unit);
/// Bits occupied by a framed message of `bytes` bytes.
std::size_t framed_bits(std::size_t bytes, std::size_t unit);
/// Removes every complete framed message from the front of `pending`.
/// Throws SchemeError on an implausible length or bad padding.
std::vector<Bytes> deframe(Bits& pending, std::size_t unit);

struct DecodeOutput {
  std::vector<Bytes> messages;
  std::uint32_t skipped = 0;
};

/// One stegosystem bound to one key, turning hiddentexts into serialized
/// cover blocks and back. Sessions live in SessionState values, so a caller
/// can work on a copy and commit it only on success.
class SchemeCodec {
 public:
  virtual ~SchemeCodec() = default;
  virtual SchemeKind kind() const = 0;
  /// Padding unit in message bits.
  virtual std::size_t unit() const = 0;

  /// Encodes one hiddentext, advancing `state`.
  virtual std::vector<Bytes> encode(SessionState& state, const Bytes& hiddentext) = 0;
  /// Decodes blocks in order and returns the messages they complete.
  DecodeOutput decode(SessionState& state, const std::vector<Bytes>& blocks);

 protected:
  /// Appends recovered message bits to state.pending; counts skipped blocks.
  virtual void decode_blocks(SessionState& state, const std::vector<Bytes>& blocks,
                             std::uint32_t& skipped) = 0;
};

/// Builds the codec for `config.scheme` keyed with `key`.
std::unique_ptr<SchemeCodec> make_codec(const BrokerConfig& config, const SymmetricKey& key);

/// Key for one app, derived from the broker key.
SymmetricKey app_key(const SymmetricKey& broker_key, std::string_view app);

}  // namespace stegolab::mq
