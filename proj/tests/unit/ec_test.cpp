#include <gtest/gtest.h>
#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <map>
#include <optional>
#include <set>

#include "stegolab/ec.hpp"
#include "test_util.hpp"
#include "toy_curve_oracle.hpp"

using namespace stegolab;
using testkit::lift;
using testkit::toy_add;
using testkit::ToyPoint;

namespace {

// Multiples of G = (5, 1) by repeated addition, k = 0..19. Frozen from the
// brute-force oracle above.
const std::vector<ToyPoint> kToyMultiples = {
    std::nullopt,          std::make_pair(5, 1),   std::make_pair(6, 3),   std::make_pair(10, 6),
    std::make_pair(3, 1),  std::make_pair(9, 16),  std::make_pair(16, 13), std::make_pair(0, 6),
    std::make_pair(13, 7), std::make_pair(7, 6),   std::make_pair(7, 11),  std::make_pair(13, 10),
    std::make_pair(0, 11), std::make_pair(16, 4),  std::make_pair(9, 1),   std::make_pair(3, 16),
    std::make_pair(10, 11), std::make_pair(6, 14), std::make_pair(5, 16),  std::nullopt};

EcStegoSession stub_session(unsigned r, std::uint64_t start = 0) {
  auto curve = toy_curve();
  return EcStegoSession(curve, std::make_shared<StubScalarSource>(curve->order()),
                        std::make_shared<IdentityPermutation>(r), start);
}

BigInt from_bn(const BIGNUM* bn) {
  char* hex = BN_bn2hex(bn);
  BigInt v(hex, 16);
  OPENSSL_free(hex);
  return v;
}

BIGNUM* to_bn(const BigInt& v) {
  BIGNUM* bn = nullptr;
  BN_hex2bn(&bn, v.get_str(16).c_str());
  return bn;
}

// k * P on P-256 computed by OpenSSL; P = nullopt means the generator.
CurvePoint openssl_mul(const BigInt& k, const std::optional<CurvePoint>& p) {
  EC_GROUP* group = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
  BN_CTX* ctx = BN_CTX_new();
  EC_POINT* out = EC_POINT_new(group);
  BIGNUM* bk = to_bn(k);
  if (p) {
    EC_POINT* in = EC_POINT_new(group);
    BIGNUM* x = to_bn(p->x);
    BIGNUM* y = to_bn(p->y);
    EC_POINT_set_affine_coordinates(group, in, x, y, ctx);
    EC_POINT_mul(group, out, nullptr, in, bk, ctx);
    BN_free(x);
    BN_free(y);
    EC_POINT_free(in);
  } else {
    EC_POINT_mul(group, out, bk, nullptr, nullptr, ctx);
  }
  BIGNUM* x = BN_new();
  BIGNUM* y = BN_new();
  EC_POINT_get_affine_coordinates(group, out, x, y, ctx);
  CurvePoint result{from_bn(x), from_bn(y), false};
  BN_free(x);
  BN_free(y);
  BN_free(bk);
  EC_POINT_free(out);
  BN_CTX_free(ctx);
  EC_GROUP_free(group);
  return result;
}

}  // namespace

TEST(ToyCurve, BruteForceGroupHasOrder19) {
  const auto pts = testkit::toy_points();
  EXPECT_EQ(pts.size(), 19u);
  ToyPoint acc = kToyMultiples[1];
  int order = 1;
  while (acc) {
    acc = toy_add(acc, kToyMultiples[1]);
    ++order;
  }
  EXPECT_EQ(order, 19);
  for (int k = 0; k < 19; ++k) {
    ToyPoint r;
    for (int i = 0; i < k; ++i) r = toy_add(r, kToyMultiples[1]);
    EXPECT_EQ(r, kToyMultiples[k]) << k;
  }
}

TEST(ToyCurve, AdditionMatchesOracle) {
  const auto& c = toy_curve()->params();
  const CurvePoint g = lift(kToyMultiples[1]);
  EXPECT_EQ(ec_add(g, g, c), (CurvePoint{6, 3, false}));
  EXPECT_EQ(ec_add(g, CurvePoint::at_infinity(), c), g);
  EXPECT_TRUE(ec_add(g, ec_negate(g, c), c).infinity);
  for (const auto& p : testkit::toy_points())
    for (const auto& q : testkit::toy_points())
      ASSERT_EQ(ec_add(lift(p), lift(q), c), lift(toy_add(p, q)));
}

TEST(ToyCurve, GroupAxiomsExhaustive) {
  const auto& c = toy_curve()->params();
  std::vector<CurvePoint> pts;
  for (const auto& p : testkit::toy_points()) pts.push_back(lift(p));
  for (const auto& p : pts) {
    EXPECT_EQ(ec_add(p, CurvePoint::at_infinity(), c), p);
    EXPECT_TRUE(ec_add(p, ec_negate(p, c), c).infinity);
    for (const auto& q : pts) {
      const CurvePoint pq = ec_add(p, q, c);
      ASSERT_EQ(pq, ec_add(q, p, c));
      ASSERT_TRUE(pq.infinity || is_on_curve(pq, c));
      for (const auto& r : pts) ASSERT_EQ(ec_add(pq, r, c), ec_add(p, ec_add(q, r, c), c));
    }
  }
}

TEST(ToyCurve, ScalarMultiplicationMatchesRepeatedAddition) {
  auto curve = toy_curve();
  const auto& c = curve->params();
  for (int k = 0; k < 20; ++k) {
    EXPECT_EQ(ec_scalar_mul(k, c.g, c), lift(kToyMultiples[k])) << k;
    EXPECT_EQ(curve->mul_base(k), lift(kToyMultiples[k])) << k;
  }
  for (const auto& p : testkit::toy_points()) {
    for (int k = 0; k < 40; ++k) {
      ToyPoint r;
      for (int i = 0; i < k; ++i) r = toy_add(r, p);
      ASSERT_EQ(ec_scalar_mul(k, lift(p), c), lift(r));
    }
  }
}

TEST(Curve, OffCurveInputsRejected) {
  const auto& c = toy_curve()->params();
  const CurvePoint bad{1, 1, false};
  EXPECT_THROW(ec_add(bad, c.g, c), PointNotOnCurve);
  EXPECT_THROW(ec_scalar_mul(3, bad, c), PointNotOnCurve);
  EXPECT_THROW(ec_scalar_mul(-1, c.g, c), InvalidArgument);
}

TEST(Curve, ValidationCatchesBadParameters) {
  CurveParams c = toy_curve()->params();
  EXPECT_NO_THROW(validate_curve(c));
  CurveParams wrong_order = c;
  wrong_order.n = 18;
  EXPECT_THROW(validate_curve(wrong_order), InvalidArgument);
  CurveParams off = c;
  off.g = CurvePoint{1, 1, false};
  EXPECT_THROW(validate_curve(off), InvalidArgument);
  CurveParams singular = c;
  singular.a = 0;
  singular.b = 0;
  EXPECT_THROW(validate_curve(singular), InvalidArgument);
}

TEST(Curve, FilesMatchBuiltins) {
  const CurveParams toy = load_curve_file(testkit::data_path("curves/toy17.curve"));
  EXPECT_EQ(toy.p, 17);
  EXPECT_EQ(toy.n, 19);
  EXPECT_EQ(toy.g, toy_curve()->params().g);
  const CurveParams p256 = load_curve_file(testkit::data_path("curves/p256.curve"));
  EXPECT_EQ(p256.p, p256_curve()->params().p);
  EXPECT_EQ(p256.n, p256_curve()->params().n);
  EXPECT_EQ(p256.g, p256_curve()->params().g);
  EXPECT_THROW(parse_curve("p=11\na=2\n"), ParseError);
  EXPECT_THROW(parse_curve("p=zz\na=2\nb=2\ngx=5\ngy=1\nn=13\n"), ParseError);
  EXPECT_THROW(parse_curve("p=11\np=11\n"), ParseError);
}

TEST(Curve, P256AgreesWithOpenSsl) {
  auto curve = p256_curve();
  validate_curve(curve->params());
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const BigInt k = curve->random_scalar(rng);
    const CurvePoint expected = openssl_mul(k, std::nullopt);
    ASSERT_EQ(curve->mul_base(k), expected);
    ASSERT_TRUE(curve->mul_base_equals(k, expected));
    if (i < 5) {
      ASSERT_EQ(ec_scalar_mul(k, curve->params().g, curve->params()), expected);
    }
  }
}

TEST(Curve, PointEncoding) {
  auto curve = p256_curve();
  std::mt19937_64 rng(2);
  const CurvePoint q = curve->mul_base(curve->random_scalar(rng));
  const Bytes enc = curve->encode_point(q);
  ASSERT_EQ(enc.size(), 65u);
  EXPECT_EQ(enc[0], 0x04);
  EXPECT_EQ(curve->decode_point(enc), q);
  Bytes bad = enc;
  bad[64] ^= 1;
  EXPECT_THROW(curve->decode_point(bad), PointNotOnCurve);
  bad = enc;
  bad[0] = 0x02;
  EXPECT_THROW(curve->decode_point(bad), PointNotOnCurve);
  EXPECT_THROW(curve->decode_point(Bytes(64)), PointNotOnCurve);
  EXPECT_THROW(curve->encode_point(CurvePoint::at_infinity()), InvalidArgument);
  EXPECT_EQ(toy_curve()->encode_point(toy_curve()->params().g), (Bytes{0x04, 0x05, 0x01}));
}

TEST(EcStego, StubTrace) {
  auto enc = stub_session(2);
  const EcEncoding e = se_ec(enc, 0b01);
  EXPECT_EQ(e.index, 1u);
  EXPECT_EQ(e.d, 2);
  EXPECT_EQ(e.q, lift(kToyMultiples[2]));
  EXPECT_EQ(e.window_base, 0u);
  EXPECT_EQ(enc.counter().value(), 4u);

  auto dec = stub_session(2);
  EXPECT_EQ(sd_ec(dec, e.q), 0b01u);
  EXPECT_EQ(dec.counter().value(), 4u);
}

TEST(EcStego, ZeroWordUsesFirstScalar) {
  auto enc = stub_session(2, 8);
  const EcEncoding e = se_ec(enc, 0);
  EXPECT_EQ(e.index, 0u);
  EXPECT_EQ(e.d, enc.window_scalar(8));
  EXPECT_EQ(e.d, 9);
}

TEST(EcStego, ConsecutiveWindowsAreDisjoint) {
  auto enc = stub_session(2);
  std::set<std::string> keys;
  for (std::uint32_t m : {3u, 3u}) {
    const EcEncoding e = se_ec(enc, m);
    const Bytes b = enc.curve().encode_point(e.q);
    EXPECT_TRUE(keys.insert(std::string(b.begin(), b.end())).second);
  }
  EXPECT_EQ(enc.counter().value(), 8u);
}

TEST(EcStego, ForeignKeyIsNotAStegotext) {
  auto dec = stub_session(2);
  EXPECT_THROW(sd_ec(dec, lift(kToyMultiples[7])), NotAStegotext);
  EXPECT_EQ(dec.counter().value(), 4u);
  EXPECT_EQ(dec.stats().not_found, 1u);
  EXPECT_THROW(sd_ec(dec, CurvePoint{1, 1, false}), PointNotOnCurve);
  EXPECT_EQ(dec.counter().value(), 4u);
}

TEST(EcStego, StubScalarSkipsZero) {
  auto s = stub_session(2);
  // t + 1 = 19 reduces to 0, so the next attempt is used.
  EXPECT_EQ(s.window_scalar(18), 1);
  EXPECT_THROW(se_ec(s, 4), WidthMismatch);
}

TEST(EcStego, RoundTripAllWordsOnP256) {
  std::mt19937_64 rng(3);
  const SymmetricKey key = SymmetricKey::random(16, rng);
  auto enc = make_ec_session(key, p256_curve(), 8);
  auto dec = make_ec_session(key, p256_curve(), 8);
  for (std::uint32_t m = 0; m < 256; ++m) {
    ASSERT_TRUE(enc.window_is_unique(enc.counter().value()));
    const WindowTable table = dec.precompute_window(dec.counter().value());
    const EcEncoding e = se_ec(enc, m);
    ASSERT_EQ(sd_ec(dec, e.q, &table), m);
  }
  EXPECT_EQ(dec.stats().scalar_mults, 256u * 256u);
  EXPECT_EQ(dec.stats().table_lookups, 256u);
}

TEST(EcStego, DecodeCostWithoutTable) {
  std::mt19937_64 rng(4);
  const SymmetricKey key = SymmetricKey::random(16, rng);
  auto enc = make_ec_session(key, p256_curve(), 8);
  auto dec = make_ec_session(key, p256_curve(), 8);
  for (int i = 0; i < 20; ++i) {
    const std::uint32_t m = rng() & 0xFF;
    const EcEncoding e = se_ec(enc, m);
    const std::uint64_t before = dec.stats().scalar_mults;
    ASSERT_EQ(sd_ec(dec, e.q), m);
    const std::uint64_t cost = dec.stats().scalar_mults - before;
    EXPECT_EQ(cost, e.index + 1u);
    EXPECT_LE(cost, 256u);
  }
}

TEST(EcStego, ToyCurveWindowsCollideButNeverDecodeWrong) {
  // 256 scalars cannot be distinct modulo 19; the encoder must refuse
  // rather than emit a key that decodes to another word.
  std::mt19937_64 rng(5);
  const SymmetricKey key = SymmetricKey::random(16, rng);
  auto enc = make_ec_session(key, toy_curve(), 8);
  auto dec = make_ec_session(key, toy_curve(), 8);
  EXPECT_FALSE(enc.window_is_unique(0));
  int ok = 0;
  int collisions = 0;
  for (int i = 0; i < 300; ++i) {
    const std::uint32_t m = rng() & 0xFF;
    try {
      const EcEncoding e = se_ec(enc, m);
      ASSERT_EQ(sd_ec(dec, e.q), m);
      ++ok;
    } catch (const WindowCollision&) {
      ++collisions;
      dec.counter().next(dec.window_size());
    }
  }
  EXPECT_EQ(enc.counter().value(), dec.counter().value());
  EXPECT_GT(ok, 0);
  EXPECT_GT(collisions, ok);
}

TEST(EcStego, SmallWindowsRoundTripOnToyCurve) {
  std::mt19937_64 rng(6);
  for (int s = 0; s < 50; ++s) {
    const SymmetricKey key = SymmetricKey::random(16, rng);
    auto enc = make_ec_session(key, toy_curve(), 2);
    auto dec = make_ec_session(key, toy_curve(), 2);
    for (int i = 0; i < 20; ++i) {
      const std::uint32_t m = rng() & 3;
      const bool unique = enc.window_is_unique(enc.counter().value());
      try {
        const EcEncoding e = se_ec(enc, m);
        ASSERT_EQ(sd_ec(dec, e.q), m);
      } catch (const WindowCollision&) {
        ASSERT_FALSE(unique);
        dec.counter().next(dec.window_size());
      }
    }
  }
}

TEST(EcStego, ScalarsAreNeverReusedOrZero) {
  std::mt19937_64 rng(7);
  auto enc = make_ec_session(SymmetricKey::random(16, rng), p256_curve(), 4);
  std::set<BigInt> scalars;
  for (int i = 0; i < 300; ++i) {
    const EcEncoding e = se_ec(enc, rng() & 0xF);
    ASSERT_FALSE(e.q.infinity);
    ASSERT_GT(e.d, 0);
    ASSERT_LT(e.d, p256_curve()->order());
    ASSERT_TRUE(scalars.insert(e.d).second);
  }
}

TEST(EcStego, AesScalarsOnToyCurveCoverTheRange) {
  std::mt19937_64 rng(8);
  AesScalarSource src(SymmetricKey::random(16, rng), 19);
  std::map<int, int> histogram;
  for (std::uint64_t t = 0; t < 18000; ++t) {
    const BigInt d = src.scalar(t, 0);
    ASSERT_GE(d, 1);
    ASSERT_LE(d, 18);
    ++histogram[static_cast<int>(d.get_si())];
  }
  EXPECT_EQ(histogram.size(), 18u);
  for (const auto& [d, count] : histogram) EXPECT_NEAR(count, 1000, 150) << d;
}

TEST(EcStego, KeyAgreementStillWorks) {
  // The receiver holds a static key pair; the sender's ephemeral key carries
  // hidden bits. Both sides must still derive the same shared point.
  auto curve = p256_curve();
  std::mt19937_64 rng(9);
  auto enc = make_ec_session(SymmetricKey::random(16, rng), curve, 8);
  for (int i = 0; i < 5; ++i) {
    const BigInt b = curve->random_scalar(rng);
    const CurvePoint big_b = curve->mul_base(b);
    const EcEncoding e = se_ec(enc, rng() & 0xFF);
    const CurvePoint sender = ec_scalar_mul(e.d, big_b, curve->params());
    const CurvePoint receiver = openssl_mul(b, e.q);
    EXPECT_EQ(sender, receiver);
  }
}

TEST(EcStego, EphemeralKeyChannelEmitsValidKeys) {
  EphemeralKeyChannel channel(p256_curve(), 10);
  History h;
  for (int i = 0; i < 20; ++i) {
    const CoverBlock c = channel.sample(h);
    ASSERT_EQ(c.bits.size(), 65u * 8);
    EXPECT_NO_THROW(p256_curve()->decode_point(c.bits.bytes()));
    h.append(c);
  }
}

TEST(EcStego, SessionRejectsBadWidth) {
  auto curve = toy_curve();
  auto src = std::make_shared<StubScalarSource>(curve->order());
  EXPECT_THROW(EcStegoSession(curve, src, std::make_shared<IdentityPermutation>(1)),
               InvalidArgument);
  EXPECT_THROW(EcStegoSession(curve, src, std::make_shared<IdentityPermutation>(16)),
               InvalidArgument);
}
