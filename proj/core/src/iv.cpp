#include "stegolab/iv.hpp"

#include <algorithm>

#include "stegolab/error.hpp"

namespace stegolab {

IvStegoSession::IvStegoSession(std::shared_ptr<const KeyedPermutation> prp,
                               std::uint64_t counter_start)
    : prp_(std::move(prp)),
      counter_(counter_start, static_cast<unsigned>(std::min<std::size_t>(
                                  prp_ ? prp_->width() : 64, 64))) {
  if (!prp_) throw InvalidArgument("IV session needs a PRP");
}

IvStegoSession make_iv_session(const SymmetricKey& key, std::uint64_t counter_start) {
  return IvStegoSession(std::make_shared<AesPermutation>(key), counter_start);
}

namespace {

Bits counter_block(std::uint64_t n, std::size_t width) {
  if (width <= 64) return Bits::from_uint(n, width);
  Bits out(width - 64);
  out.append(Bits::from_uint(n, 64));
  return out;
}

}  // namespace

Stegotext se_iv(IvStegoSession& session, const Bits& message) {
  const std::size_t b = session.block_bits();
  if (message.size() % b != 0) {
    throw WidthMismatch("message length " + std::to_string(message.size()) +
                        " is not a multiple of the block size " + std::to_string(b));
  }
  const std::size_t blocks = message.size() / b;
  if (!session.counter().can_advance(blocks)) session.counter().next(blocks);

  Stegotext out;
  out.reserve(blocks);
  for (std::size_t i = 0; i < blocks; ++i) {
    const std::uint64_t n = session.counter().next();
    CoverBlock c;
    c.bits = session.prp().apply(counter_block(n, b)) ^ message.slice(i * b, b);
    c.timestamp = ++session.tick_;
    out.push_back(std::move(c));
  }
  return out;
}

Bits sd_iv(IvStegoSession& session, const Stegotext& stegotext) {
  const std::size_t b = session.block_bits();
  for (const auto& c : stegotext) {
    if (c.bits.size() != b) {
      throw WidthMismatch("stegotext block has " + std::to_string(c.bits.size()) +
                          " bits, expected " + std::to_string(b));
    }
  }
  if (!session.counter().can_advance(stegotext.size())) session.counter().next(stegotext.size());

  Bits out;
  for (const auto& c : stegotext) {
    const std::uint64_t n = session.counter().next();
    out.append(session.prp().apply(counter_block(n, b)) ^ c.bits);
  }
  return out;
}

Stegotext se_iv_message(IvStegoSession& session, const Bits& message) {
  return se_iv(session, pad_to_unit(message, session.block_bits()));
}

Bits sd_iv_message(IvStegoSession& session, const Stegotext& stegotext) {
  return strip_padding(sd_iv(session, stegotext));
}

Bytes to_block_stream(const Stegotext& blocks) {
  Bits all;
  for (const auto& c : blocks) all.append(c.bits);
  return Bytes(all.bytes().begin(), all.bytes().end());
}

Stegotext from_block_stream(std::span<const std::uint8_t> stream, std::size_t block_bits) {
  const std::size_t total = stream.size() * 8;
  if (block_bits == 0 || total % block_bits != 0) {
    throw WidthMismatch("stream of " + std::to_string(total) +
                        " bits is not a whole number of blocks");
  }
  const Bits all = Bits::from_bytes(stream);
  Stegotext out;
  for (std::size_t pos = 0; pos < total; pos += block_bits) {
    out.push_back(CoverBlock{all.slice(pos, block_bits), out.size() + 1, {}});
  }
  return out;
}

}  // namespace stegolab
