#pragma once

#include <memory>

#include "stegolab/bits.hpp"
#include "stegolab/channel.hpp"
#include "stegolab/crypto.hpp"

namespace stegolab {

/// Stegosystem over a channel of uniformly random b-bit initialization
/// vectors. Block i of a message is PRP(K, N) XOR m_i where N is the next
/// counter value.
///
/// The PRP width fixes the block size b. The counter is b bits wide (capped
/// at 64), so a stub 8-bit session overflows after 255 blocks.
class IvStegoSession {
 public:
  IvStegoSession(std::shared_ptr<const KeyedPermutation> prp, std::uint64_t counter_start = 0);

  std::size_t block_bits() const { return prp_->width(); }
  const KeyedPermutation& prp() const { return *prp_; }
  CounterState& counter() { return counter_; }
  const CounterState& counter() const { return counter_; }

  /// Tick of the most recently emitted block.
  std::uint64_t tick() const { return tick_; }
  void set_tick(std::uint64_t tick) { tick_ = tick; }

 private:
  friend Stegotext se_iv(IvStegoSession&, const Bits&);

  std::shared_ptr<const KeyedPermutation> prp_;
  CounterState counter_;
  std::uint64_t tick_ = 0;
};

/// Production session: AES-128 keyed with `key`.
IvStegoSession make_iv_session(const SymmetricKey& key, std::uint64_t counter_start = 0);

/// Encodes a message whose length is a multiple of b. Each block gets the
/// next tick as its timestamp.
Stegotext se_iv(IvStegoSession& session, const Bits& message);

/// Exact inverse of se_iv for a synchronized session. Blocks must be b bits.
Bits sd_iv(IvStegoSession& session, const Stegotext& stegotext);

/// Arbitrary-length messages: pad with a 1 bit and zeros to a multiple of b,
/// then encode. Aligned messages gain a full padding block.
Stegotext se_iv_message(IvStegoSession& session, const Bits& message);
Bits sd_iv_message(IvStegoSession& session, const Stegotext& stegotext);

/// Raw stream format: blocks concatenated, MSB first, no framing.
Bytes to_block_stream(const Stegotext& blocks);
Stegotext from_block_stream(std::span<const std::uint8_t> stream, std::size_t block_bits);

}  // namespace stegolab
