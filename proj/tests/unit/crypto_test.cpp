#include <gtest/gtest.h>
#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <set>

#include "stegolab/crypto.hpp"
#include "stegolab/error.hpp"
#include "test_util.hpp"

using namespace stegolab;

namespace {

// Single-block AES-128 straight from OpenSSL, independent of AesPermutation.
std::array<std::uint8_t, 16> reference_aes(const Bytes& key, const std::array<std::uint8_t, 16>& in) {
  std::array<std::uint8_t, 16> out{};
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  int len = 0;
  EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key.data(), nullptr);
  EVP_CIPHER_CTX_set_padding(ctx, 0);
  EVP_EncryptUpdate(ctx, out.data(), &len, in.data(), 16);
  EVP_CIPHER_CTX_free(ctx);
  return out;
}

SymmetricKey key_from_hex(const char* hex) { return SymmetricKey(from_hex(hex)); }

}  // namespace

TEST(Aes, Fips197KnownAnswer) {
  // FIPS-197 appendix C.1.
  const AesPermutation aes(key_from_hex("000102030405060708090a0b0c0d0e0f"));
  const Bits pt = Bits::from_bytes(from_hex("00112233445566778899aabbccddeeff"));
  const Bits ct = aes.apply(pt);
  EXPECT_EQ(to_hex(ct.bytes()), "69c4e0d86a7b0430d8cdb78070b4c55a");
  EXPECT_EQ(aes.invert(ct), pt);
}

TEST(Aes, RoundTripRandomInputs) {
  std::mt19937_64 rng(1);
  const AesPermutation aes(SymmetricKey::random(16, rng));
  for (int i = 0; i < 10000; ++i) {
    const Bits x = testkit::random_bits(128, rng);
    ASSERT_EQ(aes.invert(aes.apply(x)), x);
  }
  EXPECT_THROW(aes.apply(Bits(64)), WidthMismatch);
}

TEST(StubPrp, XorExample) {
  const KeyedFunctionSpec spec{FunctionKind::block_prp_b_bits, Flavor::stub};
  auto prp = make_permutation(spec, SymmetricKey(Bytes{0x0F}), 8);
  EXPECT_EQ(prp_apply(*prp, Bits::from_uint(0x01, 8)).to_uint(), 0x0Eu);
  std::set<std::uint64_t> outputs;
  for (std::uint64_t x = 0; x < 256; ++x) outputs.insert(prp->apply_word(x));
  EXPECT_EQ(outputs.size(), 256u);
}

TEST(StubPrp, WordStubIsIdentity) {
  auto prp = make_permutation({FunctionKind::word_prp_r_bits, Flavor::stub}, SymmetricKey(), 5);
  for (std::uint64_t x = 0; x < 32; ++x) EXPECT_EQ(prp->apply_word(x), x);
}

TEST(Prp, InvertUndoesApplyForEveryFlavorAndWidth) {
  std::mt19937_64 rng(2);
  const SymmetricKey key = SymmetricKey::random(16, rng);
  struct Case {
    FunctionKind kind;
    Flavor flavor;
    std::size_t width;
  };
  const Case cases[] = {
      {FunctionKind::block_prp_b_bits, Flavor::production, 128},
      {FunctionKind::block_prp_b_bits, Flavor::stub, 8},
      {FunctionKind::block_prp_b_bits, Flavor::stub, 128},
      {FunctionKind::block_prp_b_bits, Flavor::true_random, 128},
      {FunctionKind::block_prp_b_bits, Flavor::true_random, 8},
      {FunctionKind::word_prp_r_bits, Flavor::production, 2},
      {FunctionKind::word_prp_r_bits, Flavor::production, 8},
      {FunctionKind::word_prp_r_bits, Flavor::production, 15},
      {FunctionKind::word_prp_r_bits, Flavor::stub, 8},
      {FunctionKind::word_prp_r_bits, Flavor::true_random, 8},
  };
  for (const auto& c : cases) {
    auto prp = make_permutation({c.kind, c.flavor}, key, c.width, 99);
    for (int i = 0; i < 300; ++i) {
      const Bits x = testkit::random_bits(c.width, rng);
      ASSERT_EQ(prp->invert(prp->apply(x)), x) << c.width;
      ASSERT_EQ(prp->apply(prp->invert(x)), x) << c.width;
    }
  }
}

TEST(Prp, WordPermutationsAreBijections) {
  std::mt19937_64 rng(3);
  for (std::size_t width : {2u, 8u, 12u}) {
    for (Flavor f : {Flavor::production, Flavor::true_random}) {
      auto prp = make_permutation({FunctionKind::word_prp_r_bits, f},
                                  SymmetricKey::random(16, rng), width, rng());
      std::set<std::uint64_t> seen;
      for (std::uint64_t x = 0; x < (1u << width); ++x) seen.insert(prp->apply_word(x));
      EXPECT_EQ(seen.size(), std::size_t{1} << width);
    }
  }
}

TEST(Prp, RankedPermutationMatchesIndependentSort) {
  const SymmetricKey key = key_from_hex("2b7e151628aed2a6abf7158809cf4f3c");
  const RankedPermutation prp(key, 6);
  std::vector<std::pair<std::array<std::uint8_t, 16>, std::uint32_t>> tagged;
  for (std::uint32_t x = 0; x < 64; ++x) {
    std::array<std::uint8_t, 16> in{};
    in[0] = 'W';
    in[15] = static_cast<std::uint8_t>(x);
    tagged.emplace_back(reference_aes(key.bytes(), in), x);
  }
  std::sort(tagged.begin(), tagged.end());
  for (std::uint32_t rank = 0; rank < 64; ++rank) {
    EXPECT_EQ(prp.apply_word(tagged[rank].second), rank);
  }
}

TEST(Prp, TrueRandomMemoizes) {
  TrueRandomPermutation prp(16, 5);
  const Bits x = Bits::from_uint(1234, 16);
  const Bits y = prp.apply(x);
  EXPECT_EQ(prp.apply(x), y);
  EXPECT_EQ(prp.invert(y), x);
  EXPECT_EQ(prp.queries(), 1u);
}

TEST(Prf, ParityStub) {
  ParityStubPrf prf;
  EXPECT_TRUE(prf_bit(prf, 0, {Bits::from_string("01"), 0, {}}));
  EXPECT_FALSE(prf_bit(prf, 7, {Bits::from_string("11"), 0, {}}));
}

TEST(Prf, ProductionIsDeterministicAndMatchesDefinition) {
  const SymmetricKey key = key_from_hex("000102030405060708090a0b0c0d0e0f");
  AesBitPrf prf(key);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t n = rng();
    const Bits block = testkit::random_bits(1 + rng() % 200, rng);
    const bool bit = prf.evaluate(n, block);
    ASSERT_EQ(prf.evaluate(n, block), bit);

    // LSB of AES_K(N || SHA-256(len || bits)[0..8)).
    Bytes material(8);
    for (int k = 0; k < 8; ++k) material[7 - k] = static_cast<std::uint8_t>(block.size() >> (8 * k));
    material.insert(material.end(), block.bytes().begin(), block.bytes().end());
    std::array<std::uint8_t, 32> digest{};
    SHA256(material.data(), material.size(), digest.data());
    std::array<std::uint8_t, 16> in{};
    for (int k = 0; k < 8; ++k) in[7 - k] = static_cast<std::uint8_t>(n >> (8 * k));
    std::copy_n(digest.begin(), 8, in.begin() + 8);
    ASSERT_EQ(bit, (reference_aes(key.bytes(), in)[15] & 1u) != 0);
  }
}

TEST(Prf, ProductionIsBalanced) {
  std::mt19937_64 rng(5);
  AesBitPrf prf(SymmetricKey::random(16, rng));
  int ones = 0;
  constexpr int kPairs = 100000;
  for (int i = 0; i < kPairs; ++i) {
    ones += prf.evaluate(static_cast<std::uint64_t>(i), Bits::from_uint(rng(), 64));
  }
  EXPECT_NEAR(ones / double(kPairs), 0.5, 0.01);
}

TEST(Prf, TrueRandomMemoizesPerQuery) {
  TrueRandomBitPrf prf(6);
  const Bits b = Bits::from_string("1");
  const bool first = prf.evaluate(3, b);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(prf.evaluate(3, b), first);
  int ones = 0;
  for (std::uint64_t n = 0; n < 20000; ++n) ones += prf.evaluate(n, b);
  EXPECT_NEAR(ones / 20000.0, 0.5, 0.02);
}

TEST(Counter, Examples) {
  CounterState c(0);
  EXPECT_EQ(counter_next(c), 0u);
  EXPECT_EQ(c.value(), 1u);
  CounterState d(5);
  EXPECT_EQ(counter_next(d, 256), 5u);
  EXPECT_EQ(d.value(), 261u);
  CounterState top(~std::uint64_t{0});
  EXPECT_THROW(counter_next(top), CounterOverflow);
  CounterState narrow(255, 8);
  EXPECT_THROW(narrow.next(), CounterOverflow);
  CounterState near(254, 8);
  EXPECT_EQ(near.next(), 254u);
  EXPECT_THROW(near.next(), CounterOverflow);
}

TEST(Counter, NeverRepeats) {
  std::mt19937_64 rng(7);
  CounterState c(0, 20);
  std::set<std::uint64_t> seen;
  try {
    for (;;) {
      const std::uint64_t stride = 1 + rng() % 300;
      const std::uint64_t v = c.next(stride);
      for (std::uint64_t k = 0; k < stride; ++k) ASSERT_TRUE(seen.insert(v + k).second);
    }
  } catch (const CounterOverflow&) {
  }
  EXPECT_GT(seen.size(), 1000000u);
}

TEST(Keys, FileRoundTripChecksLength) {
  testkit::TempDir dir;
  const SymmetricKey k = SymmetricKey::generate(16);
  save_key_file(dir.file("k"), k);
  EXPECT_EQ(load_key_file(dir.file("k"), 16), k);
  EXPECT_THROW(load_key_file(dir.file("k"), 32), ParseError);
  EXPECT_THROW(load_key_file(dir.file("missing"), 16), ParseError);
}

TEST(Keys, SubkeysDependOnLabel) {
  const SymmetricKey k = key_from_hex("000102030405060708090a0b0c0d0e0f");
  EXPECT_EQ(derive_subkey(k, "a"), derive_subkey(k, "a"));
  EXPECT_NE(derive_subkey(k, "a"), derive_subkey(k, "b"));
  EXPECT_EQ(derive_subkey(k, "a").bytes().size(), 16u);
}
