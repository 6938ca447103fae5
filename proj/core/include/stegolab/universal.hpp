#pragma once

#include <memory>

#include "stegolab/bits.hpp"
#include "stegolab/channel.hpp"
#include "stegolab/crypto.hpp"

namespace stegolab {

/// Repetition code: each bit is repeated `repeat` times and decoded by
/// majority vote. `repeat` must be odd.
struct EccSpec {
  std::size_t repeat = 1;
};

Bits ecc_encode(const Bits& message, const EccSpec& ecc);
/// Throws InvalidArgument when the length is not a multiple of `repeat`.
Bits ecc_decode(const Bits& codeword, const EccSpec& ecc);

/// PRF rejection-sampling stegosystem: for each encoded bit, draw from the
/// channel at most twice, keeping the first block whose keyed bit matches,
/// else the second draw.
///
/// Channels are admitted when their declared min-entropy is at least 1 bit
/// (every next block has probability at most 1/2). Sessions that only decode
/// may be built without a channel.
class UniversalStegoSession {
 public:
  UniversalStegoSession(std::shared_ptr<const BitPrf> prf, CounterState counter, EccSpec ecc,
                        std::unique_ptr<ChannelModel> channel = nullptr);

  static constexpr double kMinEntropyAdmission = 1.0;

  const BitPrf& prf() const { return *prf_; }
  CounterState& counter() { return counter_; }
  const CounterState& counter() const { return counter_; }
  const EccSpec& ecc() const { return ecc_; }
  bool can_encode() const { return channel_ != nullptr; }
  ChannelModel& channel();

  /// Samples drawn by the most recent encode (one or two per emitted block).
  std::size_t last_draws() const { return last_draws_; }

 private:
  friend Stegotext se_universal(UniversalStegoSession&, const Bits&, History&);

  std::shared_ptr<const BitPrf> prf_;
  CounterState counter_;
  EccSpec ecc_;
  std::unique_ptr<ChannelModel> channel_;
  std::size_t last_draws_ = 0;
};

/// Encodes `message` (ECC applied first). Emits one block per encoded bit and
/// extends `h` with each emitted block. Consumes one counter value per block.
Stegotext se_universal(UniversalStegoSession& session, const Bits& message, History& h);

/// Recovers the raw keyed bit of every block, one counter value each, without
/// error correction.
Bits sd_universal_raw(UniversalStegoSession& session, const Stegotext& stegotext);

/// Decodes a stegotext. The history argument is accepted for symmetry with
/// the encoder; decoding never consults the channel. A decoder whose counter
/// is out of step with the encoder silently returns garbage.
Bits sd_universal(UniversalStegoSession& session, const Stegotext& stegotext, const History& h);

}  // namespace stegolab
