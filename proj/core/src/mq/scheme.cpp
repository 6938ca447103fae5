#include "stegolab/mq/scheme.hpp"

#include "stegolab/channel.hpp"
#include "stegolab/ec.hpp"
#include "stegolab/iv.hpp"
#include "stegolab/mq/frame.hpp"
#include "stegolab/universal.hpp"

namespace stegolab::mq {

namespace {

void write_bits(ByteWriter& w, const Bits& b) {
  w.u32(static_cast<std::uint32_t>(b.size()));
  w.bytes(b.bytes());
}

Bits read_bits(ByteReader& r) {
  const std::uint32_t n = r.u32();
  return Bits::from_bytes(r.bytes((n + 7) / 8), n);
}

std::uint64_t os_seed() {
  std::random_device rd;
  return (std::uint64_t{rd()} << 32) | rd();
}

// ---------------------------------------------------------------------------

class IvCodec final : public SchemeCodec {
 public:
  explicit IvCodec(const SymmetricKey& key) : prp_(std::make_shared<AesPermutation>(key)) {}
  SchemeKind kind() const override { return SchemeKind::iv; }
  std::size_t unit() const override { return prp_->width(); }

  std::vector<Bytes> encode(SessionState& state, const Bytes& hiddentext) override {
    IvStegoSession session(prp_, state.counter);
    session.set_tick(state.tick);
    const Stegotext s = se_iv(session, frame_message(hiddentext, unit()));
    state.counter = session.counter().value();
    state.tick = session.tick();
    std::vector<Bytes> out;
    out.reserve(s.size());
    for (const auto& b : s) out.emplace_back(b.bits.bytes().begin(), b.bits.bytes().end());
    return out;
  }

 protected:
  void decode_blocks(SessionState& state, const std::vector<Bytes>& blocks,
                     std::uint32_t&) override {
    const std::size_t want = unit() / 8;
    Stegotext s;
    s.reserve(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (blocks[i].size() != want) {
        throw InvalidArgument("block " + std::to_string(i) + ": expected " +
                              std::to_string(unit()) + " bits, got " +
                              std::to_string(blocks[i].size() * 8));
      }
      s.push_back({Bits::from_bytes(blocks[i]), 0, {}});
    }
    IvStegoSession session(prp_, state.counter);
    state.pending.append(sd_iv(session, s));
    state.counter = session.counter().value();
  }

 private:
  std::shared_ptr<const AesPermutation> prp_;
};

// Universal blocks travel as u64 timestamp, u16 bit length, then the bits.
class UniversalCodec final : public SchemeCodec {
 public:
  UniversalCodec(const SymmetricKey& key, std::unique_ptr<ChannelModel> channel, std::size_t rho)
      : prf_(std::make_shared<AesBitPrf>(key)),
        channel_(std::move(channel)),
        ecc_{rho},
        seeds_(os_seed()) {
    if (channel_->min_entropy_bound() < UniversalStegoSession::kMinEntropyAdmission) {
      throw InvalidArgument("channel min-entropy below 1 bit");
    }
  }
  SchemeKind kind() const override { return SchemeKind::universal; }
  std::size_t unit() const override { return 1; }

  std::vector<Bytes> encode(SessionState& state, const Bytes& hiddentext) override {
    UniversalStegoSession session(prf_, CounterState(state.counter), ecc_,
                                  channel_->clone(seeds_()));
    History h;
    if (state.last_block) h.append({*state.last_block, state.tick, {}});
    const Stegotext s = se_universal(session, frame_message(hiddentext, unit()), h);
    state.counter = session.counter().value();
    if (!s.empty()) {
      state.tick = s.back().timestamp;
      state.last_block = s.back().bits;
    }
    std::vector<Bytes> out;
    out.reserve(s.size());
    for (const auto& b : s) {
      if (b.bits.size() > 0xFFFF) throw SchemeError("cover block longer than 65535 bits");
      ByteWriter w;
      w.u64(b.timestamp);
      w.u16(static_cast<std::uint16_t>(b.bits.size()));
      w.bytes(b.bits.bytes());
      out.push_back(w.take());
    }
    return out;
  }

 protected:
  void decode_blocks(SessionState& state, const std::vector<Bytes>& blocks,
                     std::uint32_t&) override {
    Stegotext s;
    s.reserve(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      try {
        ByteReader r(blocks[i]);
        CoverBlock b;
        b.timestamp = r.u64();
        const std::uint16_t nbits = r.u16();
        b.bits = Bits::from_bytes(r.bytes((nbits + 7u) / 8u), nbits);
        r.expect_end("block");
        s.push_back(std::move(b));
      } catch (const ProtocolError& e) {
        throw InvalidArgument("block " + std::to_string(i) + ": " + e.what());
      }
    }
    UniversalStegoSession session(prf_, CounterState(state.counter), ecc_);
    state.raw.append(sd_universal_raw(session, s));
    state.counter = session.counter().value();
    const std::size_t whole = state.raw.size() / ecc_.repeat * ecc_.repeat;
    state.pending.append(ecc_decode(state.raw.slice(0, whole), ecc_));
    state.raw = state.raw.slice(whole, state.raw.size() - whole);
  }

 private:
  std::shared_ptr<const BitPrf> prf_;
  std::unique_ptr<ChannelModel> channel_;
  EccSpec ecc_;
  std::mt19937_64 seeds_;
};

class EcCodec final : public SchemeCodec {
 public:
  EcCodec(const SymmetricKey& key, std::shared_ptr<const Curve> curve, unsigned r)
      : prototype_(make_ec_session(key, std::move(curve), r)), honest_(os_seed()) {}
  SchemeKind kind() const override { return SchemeKind::ec; }
  std::size_t unit() const override { return prototype_.r(); }

  std::vector<Bytes> encode(SessionState& state, const Bytes& hiddentext) override {
    EcStegoSession session = at(state.counter);
    const Curve& curve = session.curve();
    const Bits bits = frame_message(hiddentext, unit());
    std::vector<Bytes> out;
    for (std::size_t i = 0; i < bits.size(); i += unit()) {
      const auto word = static_cast<std::uint32_t>(bits.slice(i, unit()).to_uint());
      while (true) {
        try {
          out.push_back(curve.encode_point(se_ec(session, word).q));
          break;
        } catch (const WindowCollision&) {
          // The slot carries an honest key; the peer's decoder skips it.
          out.push_back(curve.encode_point(curve.mul_base(curve.random_scalar(honest_))));
        }
      }
    }
    state.counter = session.counter().value();
    return out;
  }

 protected:
  void decode_blocks(SessionState& state, const std::vector<Bytes>& blocks,
                     std::uint32_t& skipped) override {
    EcStegoSession session = at(state.counter);
    std::vector<CurvePoint> points;
    points.reserve(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      try {
        points.push_back(session.curve().decode_point(blocks[i]));
      } catch (const PointNotOnCurve& e) {
        throw InvalidArgument("block " + std::to_string(i) + ": " + e.what());
      }
    }
    for (const auto& q : points) {
      try {
        state.pending.append(Bits::from_uint(sd_ec(session, q), unit()));
      } catch (const NotAStegotext&) {
        ++skipped;
      }
    }
    state.counter = session.counter().value();
  }

 private:
  EcStegoSession at(std::uint64_t counter) const {
    EcStegoSession s = prototype_;
    s.counter() = CounterState(counter);
    return s;
  }

  EcStegoSession prototype_;
  std::mt19937_64 honest_;
};

}  // namespace

Bytes SessionState::serialize() const {
  ByteWriter w;
  w.u64(counter);
  w.u64(tick);
  write_bits(w, pending);
  write_bits(w, raw);
  w.u8(last_block.has_value());
  if (last_block) write_bits(w, *last_block);
  return w.take();
}

SessionState SessionState::parse(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  SessionState s;
  s.counter = r.u64();
  s.tick = r.u64();
  s.pending = read_bits(r);
  s.raw = read_bits(r);
  if (r.u8()) s.last_block = read_bits(r);
  r.expect_end("session state");
  return s;
}

std::size_t framed_bits(std::size_t bytes, std::size_t unit) {
  const std::size_t content = 32 + 8 * bytes + 1;
  return (content + unit - 1) / unit * unit;
}

Bits frame_message(const Bytes& hiddentext, std::size_t unit) {
  if (hiddentext.empty()) throw InvalidArgument("hiddentext is empty");
  if (hiddentext.size() > kMaxHiddentextBytes) throw InvalidArgument("hiddentext too large");
  Bits bits = Bits::from_uint(hiddentext.size(), 32);
  bits.append(Bits::from_bytes(hiddentext));
  return pad_to_unit(bits, unit);
}

std::vector<Bytes> deframe(Bits& pending, std::size_t unit) {
  std::vector<Bytes> out;
  std::size_t pos = 0;
  while (pending.size() - pos >= 32) {
    const std::uint64_t len = pending.slice(pos, 32).to_uint();
    if (len == 0 || len > kMaxHiddentextBytes) {
      throw SchemeError("decoded message length " + std::to_string(len) +
                        " is implausible; sessions are likely out of step");
    }
    const std::size_t total = framed_bits(len, unit);
    if (pending.size() - pos < total) break;
    const std::size_t tail = 32 + 8 * len;
    bool padding_ok = pending[pos + tail];
    for (std::size_t i = tail + 1; i < total && padding_ok; ++i) padding_ok = !pending[pos + i];
    if (!padding_ok) {
      throw SchemeError("bad padding after a decoded message; sessions are likely out of step");
    }
    const Bits body = pending.slice(pos + 32, 8 * len);
    out.emplace_back(body.bytes().begin(), body.bytes().end());
    pos += total;
  }
  pending = pending.slice(pos, pending.size() - pos);
  return out;
}

DecodeOutput SchemeCodec::decode(SessionState& state, const std::vector<Bytes>& blocks) {
  DecodeOutput out;
  decode_blocks(state, blocks, out.skipped);
  out.messages = deframe(state.pending, unit());
  return out;
}

std::unique_ptr<SchemeCodec> make_codec(const BrokerConfig& config, const SymmetricKey& key) {
  switch (config.scheme) {
    case SchemeKind::iv:
      return std::make_unique<IvCodec>(key);
    case SchemeKind::universal:
      return std::make_unique<UniversalCodec>(key, load_channel_file(config.channel_file, 0),
                                              config.rho);
    case SchemeKind::ec: {
      auto curve = config.curve_file.empty()
                       ? p256_curve()
                       : std::make_shared<const Curve>(load_curve_file(config.curve_file));
      return std::make_unique<EcCodec>(key, std::move(curve), config.r);
    }
  }
  throw InvalidArgument("unknown scheme");
}

SymmetricKey app_key(const SymmetricKey& broker_key, std::string_view app) {
  return derive_subkey(broker_key, "stegmq:" + std::string(app));
}

}  // namespace stegolab::mq
