#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stegolab/bits.hpp"
#include "stegolab/channel.hpp"
#include "stegolab/crypto.hpp"
#include "stegolab/error.hpp"

namespace stegolab {

using BigInt = mpz_class;

/// Affine point on y^2 = x^3 + ax + b, or the point at infinity.
struct CurvePoint {
  BigInt x;
  BigInt y;
  bool infinity = false;

  static CurvePoint at_infinity() { return CurvePoint{0, 0, true}; }
  friend bool operator==(const CurvePoint& p, const CurvePoint& q) {
    if (p.infinity || q.infinity) return p.infinity == q.infinity;
    return p.x == q.x && p.y == q.y;
  }
};

struct CurveParams {
  std::string name;
  BigInt p;
  BigInt a;
  BigInt b;
  CurvePoint g;
  BigInt n;
};

class PointNotOnCurve : public Error {
 public:
  using Error::Error;
};

bool is_on_curve(const CurvePoint& point, const CurveParams& curve);
/// Throws InvalidArgument unless the discriminant is nonzero, G is on the
/// curve and n*G is the point at infinity.
void validate_curve(const CurveParams& curve);

/// Group law. Throws PointNotOnCurve for inputs off the curve.
CurvePoint ec_add(const CurvePoint& p, const CurvePoint& q, const CurveParams& curve);
CurvePoint ec_negate(const CurvePoint& p, const CurveParams& curve);
/// Affine double-and-add; k must be non-negative.
CurvePoint ec_scalar_mul(const BigInt& k, const CurvePoint& p, const CurveParams& curve);

/// Curve parameters plus a fixed-base comb table for G. Immutable after
/// construction, so one instance can be shared across threads.
class Curve {
 public:
  explicit Curve(CurveParams params);

  const CurveParams& params() const { return params_; }
  const BigInt& order() const { return params_.n; }
  /// Bytes per field element in the point encoding.
  std::size_t field_bytes() const { return field_bytes_; }

  /// k*G via the comb table; k is reduced mod n.
  CurvePoint mul_base(const BigInt& k) const;
  /// True when k*G == q, without converting k*G to affine.
  bool mul_base_equals(const BigInt& k, const CurvePoint& q) const;

  /// Uncompressed encoding: 0x04 || x || y, big-endian, fixed width.
  Bytes encode_point(const CurvePoint& point) const;
  /// Throws PointNotOnCurve for a malformed or off-curve encoding.
  CurvePoint decode_point(std::span<const std::uint8_t> data) const;
  std::size_t encoded_point_bytes() const { return 1 + 2 * field_bytes_; }

  BigInt random_scalar(std::mt19937_64& rng) const;

 private:
  struct Jacobian {
    BigInt x, y, z;
    bool infinity = true;
  };
  Jacobian comb(const BigInt& k) const;
  void add_affine(Jacobian& acc, const CurvePoint& q) const;
  void double_in_place(Jacobian& p) const;
  CurvePoint to_affine(const Jacobian& p) const;

  CurveParams params_;
  std::size_t field_bytes_;
  static constexpr unsigned kCombBits = 8;
  // comb_[i][v - 1] = v * 2^(kCombBits * i) * G
  std::vector<std::vector<CurvePoint>> comb_;
};

/// y^2 = x^3 + 2x + 2 over F_17 with G = (5, 1) of order 19.
std::shared_ptr<const Curve> toy_curve();
/// NIST P-256 / secp256r1.
std::shared_ptr<const Curve> p256_curve();

/// Parses `p=`, `a=`, `b=`, `gx=`, `gy=`, `n=` lines (hex, big-endian), with
/// optional `name=` and '#' comments.
CurveParams parse_curve(std::string_view text);
CurveParams load_curve_file(const std::string& path);

// ---------------------------------------------------------------------------
// Ephemeral-key stegosystem.

/// Derives the window scalars d(t) from counter values t.
class ScalarSource {
 public:
  virtual ~ScalarSource() = default;
  /// Scalar for counter value t. `attempt` > 0 asks for a deterministic
  /// re-derivation after a result that reduced to zero.
  virtual BigInt scalar(std::uint64_t t, unsigned attempt) const = 0;
};

/// Production source: AES-128 output blocks for (t, attempt, i) are
/// concatenated to at least bitlen(n) + 64 bits, then reduced into [1, n-1]
/// as (v mod (n-1)) + 1.
class AesScalarSource final : public ScalarSource {
 public:
  AesScalarSource(const SymmetricKey& key, const BigInt& order);
  BigInt scalar(std::uint64_t t, unsigned attempt) const override;

 private:
  AesPermutation aes_;
  BigInt order_;
  std::size_t blocks_;
};

/// Test stub: (t + 1 + attempt) mod n.
class StubScalarSource final : public ScalarSource {
 public:
  explicit StubScalarSource(const BigInt& order) : order_(order) {}
  BigInt scalar(std::uint64_t t, unsigned attempt) const override;

 private:
  BigInt order_;
};

/// Thrown by the decoder when no window scalar produces the given point: the
/// key is innocent or the counters are out of step. The window is consumed.
class NotAStegotext : public Error {
 public:
  using Error::Error;
};

/// Thrown by the encoder when the selected window index shares its scalar
/// with an earlier index, so the decoder would recover the wrong word. The
/// window is consumed; the caller should send an honest key in its place.
class WindowCollision : public Error {
 public:
  using Error::Error;
};

struct EcStegoStats {
  std::uint64_t scalar_mults = 0;
  std::uint64_t table_lookups = 0;
  std::uint64_t not_found = 0;
};

/// Maps point encodings of one window to the first index producing them.
class WindowTable {
 public:
  std::uint64_t base() const { return base_; }
  std::size_t size() const { return index_.size(); }
  std::optional<std::uint32_t> find(const Bytes& encoded_point) const;

 private:
  friend class EcStegoSession;
  std::uint64_t base_ = 0;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// State shared by an encoder and decoder: curve, scalar source F, word
/// permutation H on r bits, and the counter. Every message consumes a window
/// of 2^r counter values, so consecutive windows never overlap.
class EcStegoSession {
 public:
  static constexpr unsigned kMinBits = 2;
  static constexpr unsigned kMaxBits = 15;

  EcStegoSession(std::shared_ptr<const Curve> curve, std::shared_ptr<const ScalarSource> scalars,
                 std::shared_ptr<const KeyedPermutation> word_prp, std::uint64_t counter_start = 0);

  unsigned r() const { return r_; }
  std::uint64_t window_size() const { return std::uint64_t{1} << r_; }
  const Curve& curve() const { return *curve_; }
  std::shared_ptr<const Curve> curve_ptr() const { return curve_; }
  const KeyedPermutation& word_prp() const { return *word_prp_; }
  CounterState& counter() { return counter_; }
  const CounterState& counter() const { return counter_; }
  EcStegoStats& stats() { return stats_; }
  const EcStegoStats& stats() const { return stats_; }

  /// Nonzero scalar d(t) mod n, re-deriving while the reduction gives 0.
  BigInt window_scalar(std::uint64_t t) const;
  /// True when the 2^r scalars of the window at `base` are pairwise distinct.
  bool window_is_unique(std::uint64_t base) const;

  /// 2^r base-point multiplications; the result serves one decode at `base`.
  WindowTable precompute_window(std::uint64_t base);

 private:
  std::shared_ptr<const Curve> curve_;
  std::shared_ptr<const ScalarSource> scalars_;
  std::shared_ptr<const KeyedPermutation> word_prp_;
  unsigned r_;
  CounterState counter_;
  EcStegoStats stats_;
};

/// Production session: F and H keyed by subkeys of `key`.
EcStegoSession make_ec_session(const SymmetricKey& key, std::shared_ptr<const Curve> curve,
                               unsigned r, std::uint64_t counter_start = 0);

struct EcEncoding {
  BigInt d;
  CurvePoint q;
  std::uint64_t window_base = 0;
  std::uint32_t index = 0;
};

/// Encodes one r-bit word as an ephemeral key pair (d, dG).
EcEncoding se_ec(EcStegoSession& session, std::uint32_t word);

/// Recovers the word from an ephemeral public key. With a table for the
/// current window the search is one lookup; otherwise the window is
/// enumerated. Throws PointNotOnCurve (session untouched) or NotAStegotext
/// (window consumed).
std::uint32_t sd_ec(EcStegoSession& session, const CurvePoint& q,
                    const WindowTable* table = nullptr);

/// Cover channel of honest ephemeral public keys: d uniform in [1, n-1],
/// block = encode_point(dG).
class EphemeralKeyChannel final : public ChannelModel {
 public:
  EphemeralKeyChannel(std::shared_ptr<const Curve> curve, std::uint64_t seed);

  std::optional<std::size_t> block_size() const override {
    return curve_->encoded_point_bytes() * 8;
  }
  double min_entropy_bound() const override;
  std::string describe() const override { return "ephemeral keys on " + curve_->params().name; }
  std::unique_ptr<ChannelModel> clone(std::uint64_t seed) const override;

 protected:
  Bits draw(const History& h, ChannelRng& rng) override;

 private:
  std::shared_ptr<const Curve> curve_;
};

}  // namespace stegolab
