#include <cmath>
#include <set>

#include "stegolab/ec.hpp"

namespace stegolab {

AesScalarSource::AesScalarSource(const SymmetricKey& key, const BigInt& order)
    : aes_(key), order_(order) {
  if (order < 3) throw InvalidArgument("group order too small for scalar derivation");
  const std::size_t bits = mpz_sizeinbase(order.get_mpz_t(), 2) + 64;
  blocks_ = (bits + 127) / 128;
}

BigInt AesScalarSource::scalar(std::uint64_t t, unsigned attempt) const {
  Bytes material;
  material.reserve(blocks_ * kAesBlockBytes);
  for (std::size_t i = 0; i < blocks_; ++i) {
    AesPermutation::Block in{};
    for (int k = 0; k < 8; ++k) in[7 - k] = static_cast<std::uint8_t>(t >> (8 * k));
    in[8] = 'F';  // domain tag: window scalar
    in[9] = static_cast<std::uint8_t>(attempt >> 8);
    in[10] = static_cast<std::uint8_t>(attempt);
    in[15] = static_cast<std::uint8_t>(i);
    const auto out = aes_.encrypt_block(in);
    material.insert(material.end(), out.begin(), out.end());
  }
  BigInt v;
  mpz_import(v.get_mpz_t(), material.size(), 1, 1, 1, 0, material.data());
  BigInt r;
  const BigInt m = order_ - 1;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), m.get_mpz_t());
  return r + 1;
}

BigInt StubScalarSource::scalar(std::uint64_t t, unsigned attempt) const {
  BigInt v = BigInt(static_cast<unsigned long>(t)) + 1 + attempt;
  BigInt r;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), order_.get_mpz_t());
  return r;
}

std::optional<std::uint32_t> WindowTable::find(const Bytes& encoded_point) const {
  auto it = index_.find(std::string(encoded_point.begin(), encoded_point.end()));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------

EcStegoSession::EcStegoSession(std::shared_ptr<const Curve> curve,
                               std::shared_ptr<const ScalarSource> scalars,
                               std::shared_ptr<const KeyedPermutation> word_prp,
                               std::uint64_t counter_start)
    : curve_(std::move(curve)),
      scalars_(std::move(scalars)),
      word_prp_(std::move(word_prp)),
      r_(word_prp_ ? static_cast<unsigned>(word_prp_->width()) : 0),
      counter_(counter_start) {
  if (!curve_ || !scalars_ || !word_prp_) {
    throw InvalidArgument("EC session needs a curve, a scalar source and a word permutation");
  }
  if (r_ < kMinBits || r_ > kMaxBits) {
    throw InvalidArgument("payload bits per key must be in [" + std::to_string(kMinBits) + ", " +
                          std::to_string(kMaxBits) + "], got " + std::to_string(r_));
  }
}

BigInt EcStegoSession::window_scalar(std::uint64_t t) const {
  constexpr unsigned kMaxAttempts = 1024;
  for (unsigned attempt = 0; attempt < kMaxAttempts; ++attempt) {
    BigInt d = scalars_->scalar(t, attempt);
    mpz_mod(d.get_mpz_t(), d.get_mpz_t(), curve_->order().get_mpz_t());
    if (d != 0) return d;
  }
  throw Error("scalar source keeps producing 0 mod n");
}

bool EcStegoSession::window_is_unique(std::uint64_t base) const {
  std::set<BigInt> seen;
  for (std::uint64_t j = 0; j < window_size(); ++j) {
    if (!seen.insert(window_scalar(base + j)).second) return false;
  }
  return true;
}

WindowTable EcStegoSession::precompute_window(std::uint64_t base) {
  WindowTable table;
  table.base_ = base;
  for (std::uint32_t j = 0; j < window_size(); ++j) {
    const Bytes enc = curve_->encode_point(curve_->mul_base(window_scalar(base + j)));
    ++stats_.scalar_mults;
    table.index_.try_emplace(std::string(enc.begin(), enc.end()), j);
  }
  return table;
}

EcStegoSession make_ec_session(const SymmetricKey& key, std::shared_ptr<const Curve> curve,
                               unsigned r, std::uint64_t counter_start) {
  auto scalars = std::make_shared<AesScalarSource>(derive_subkey(key, "ec-window-scalar"),
                                                   curve->order());
  auto words = std::make_shared<RankedPermutation>(derive_subkey(key, "ec-word-prp"), r);
  return EcStegoSession(std::move(curve), std::move(scalars), std::move(words), counter_start);
}

EcEncoding se_ec(EcStegoSession& session, std::uint32_t word) {
  if (word >= session.window_size()) {
    throw WidthMismatch("word " + std::to_string(word) + " does not fit in " +
                        std::to_string(session.r()) + " bits");
  }
  const std::uint64_t base = session.counter().next(session.window_size());
  const auto j = static_cast<std::uint32_t>(session.word_prp().apply_word(word));

  EcEncoding out;
  out.window_base = base;
  out.index = j;
  out.d = session.window_scalar(base + j);
  for (std::uint32_t i = 0; i < j; ++i) {
    if (session.window_scalar(base + i) == out.d) {
      throw WindowCollision("window at " + std::to_string(base) + ": index " +
                            std::to_string(j) + " repeats the scalar of index " +
                            std::to_string(i));
    }
  }
  out.q = session.curve().mul_base(out.d);
  ++session.stats().scalar_mults;
  return out;
}

std::uint32_t sd_ec(EcStegoSession& session, const CurvePoint& q, const WindowTable* table) {
  if (q.infinity || !is_on_curve(q, session.curve().params())) {
    throw PointNotOnCurve("ephemeral key is not a finite point on " +
                          session.curve().params().name);
  }
  const std::uint64_t base = session.counter().next(session.window_size());

  if (table && table->base() == base) {
    ++session.stats().table_lookups;
    if (auto j = table->find(session.curve().encode_point(q))) {
      return static_cast<std::uint32_t>(session.word_prp().invert_word(*j));
    }
  } else {
    for (std::uint32_t j = 0; j < session.window_size(); ++j) {
      ++session.stats().scalar_mults;
      if (session.curve().mul_base_equals(session.window_scalar(base + j), q)) {
        return static_cast<std::uint32_t>(session.word_prp().invert_word(j));
      }
    }
  }
  ++session.stats().not_found;
  throw NotAStegotext("no scalar in the window at counter " + std::to_string(base) +
                      " produces this key");
}

// ---------------------------------------------------------------------------

EphemeralKeyChannel::EphemeralKeyChannel(std::shared_ptr<const Curve> curve, std::uint64_t seed)
    : ChannelModel(seed), curve_(std::move(curve)) {
  if (!curve_) throw InvalidArgument("ephemeral key channel needs a curve");
}

double EphemeralKeyChannel::min_entropy_bound() const {
  // Uniform over n - 1 keys.
  return std::log2(curve_->order().get_d() - 1.0);
}

std::unique_ptr<ChannelModel> EphemeralKeyChannel::clone(std::uint64_t seed) const {
  return std::make_unique<EphemeralKeyChannel>(curve_, seed);
}

Bits EphemeralKeyChannel::draw(const History&, ChannelRng& rng) {
  return Bits::from_bytes(curve_->encode_point(curve_->mul_base(curve_->random_scalar(rng))));
}

}  // namespace stegolab
