#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "stegolab/bits.hpp"
#include "stegolab/channel.hpp"

namespace stegolab {

/// Raw key material.
class SymmetricKey {
 public:
  SymmetricKey() = default;
  explicit SymmetricKey(Bytes bytes) : bytes_(std::move(bytes)) {}

  static SymmetricKey random(std::size_t nbytes, std::mt19937_64& rng);
  /// Fresh key from the operating system's entropy source.
  static SymmetricKey generate(std::size_t nbytes);

  std::size_t size_bits() const { return bytes_.size() * 8; }
  const Bytes& bytes() const { return bytes_; }

  friend bool operator==(const SymmetricKey&, const SymmetricKey&) = default;

 private:
  Bytes bytes_;
};

/// Reads a raw binary key file and checks its length.
SymmetricKey load_key_file(const std::string& path, std::size_t expected_bytes);
void save_key_file(const std::string& path, const SymmetricKey& key);

/// AES-128 block size and key size, in bytes.
inline constexpr std::size_t kAesBlockBytes = 16;

/// Derives a 128-bit subkey bound to `label` from a 128-bit master key.
SymmetricKey derive_subkey(const SymmetricKey& master, std::string_view label);

/// A synchronized d-bit counter that never wraps.
class CounterState {
 public:
  static constexpr unsigned kDefaultWidth = 64;

  explicit CounterState(std::uint64_t value = 0, unsigned width = kDefaultWidth);

  /// Returns the current value and advances by `stride`. Throws
  /// CounterOverflow unless value + stride < 2^width.
  std::uint64_t next(std::uint64_t stride = 1);
  bool can_advance(std::uint64_t stride) const;

  std::uint64_t value() const { return value_; }
  unsigned width() const { return width_; }

 private:
  std::uint64_t value_;
  unsigned width_;
};

/// A keyed permutation on fixed-width bit strings.
class KeyedPermutation {
 public:
  virtual ~KeyedPermutation() = default;
  virtual std::size_t width() const = 0;
  virtual Bits apply(const Bits& x) const = 0;
  virtual Bits invert(const Bits& y) const = 0;

  /// Integer conveniences for widths of at most 64 bits.
  std::uint64_t apply_word(std::uint64_t x) const;
  std::uint64_t invert_word(std::uint64_t y) const;

 protected:
  void check_width(const Bits& x) const;
};

/// Keyed function mapping (counter, block) to one bit.
class BitPrf {
 public:
  virtual ~BitPrf() = default;
  virtual bool evaluate(std::uint64_t counter, const Bits& block) const = 0;
  bool operator()(std::uint64_t counter, const CoverBlock& block) const {
    return evaluate(counter, block.bits);
  }
};

/// AES-128 with a per-instance key: the production 128-bit block PRP.
class AesPermutation final : public KeyedPermutation {
 public:
  explicit AesPermutation(const SymmetricKey& key);
  ~AesPermutation() override;
  AesPermutation(const AesPermutation&) = delete;
  AesPermutation& operator=(const AesPermutation&) = delete;

  std::size_t width() const override { return 128; }
  Bits apply(const Bits& x) const override;
  Bits invert(const Bits& y) const override;

  using Block = std::array<std::uint8_t, kAesBlockBytes>;
  Block encrypt_block(const Block& in) const;
  Block decrypt_block(const Block& in) const;

 private:
  struct Contexts;
  std::unique_ptr<Contexts> ctx_;
};

/// Test stub: x XOR key, for any width.
class XorStubPermutation final : public KeyedPermutation {
 public:
  explicit XorStubPermutation(Bits key) : key_(std::move(key)) {}
  std::size_t width() const override { return key_.size(); }
  Bits apply(const Bits& x) const override;
  Bits invert(const Bits& y) const override { return apply(y); }

 private:
  Bits key_;
};

/// Test stub: the identity on `width` bits.
class IdentityPermutation final : public KeyedPermutation {
 public:
  explicit IdentityPermutation(std::size_t width) : width_(width) {}
  std::size_t width() const override { return width_; }
  Bits apply(const Bits& x) const override;
  Bits invert(const Bits& y) const override { return apply(y); }

 private:
  std::size_t width_;
};

/// Production word PRP for small widths (at most 24 bits): the domain is
/// ranked by AES_K(tag || x), and the sort order is the permutation. Both
/// directions are table lookups.
class RankedPermutation final : public KeyedPermutation {
 public:
  static constexpr std::size_t kMaxWidth = 24;
  RankedPermutation(const SymmetricKey& key, std::size_t width);

  std::size_t width() const override { return width_; }
  Bits apply(const Bits& x) const override;
  Bits invert(const Bits& y) const override;

 private:
  std::size_t width_;
  std::vector<std::uint32_t> forward_;
  std::vector<std::uint32_t> inverse_;
};

/// A lazily sampled uniformly random permutation. Queries are memoized in
/// both directions, so repeated queries agree and the map stays a bijection.
class TrueRandomPermutation final : public KeyedPermutation {
 public:
  TrueRandomPermutation(std::size_t width, std::uint64_t seed);

  std::size_t width() const override { return width_; }
  Bits apply(const Bits& x) const override;
  Bits invert(const Bits& y) const override;
  std::size_t queries() const;

 private:
  Bits fresh(const std::unordered_map<Bits, Bits, Bits::Hash>& taken) const;

  std::size_t width_;
  mutable std::mutex mu_;
  mutable std::mt19937_64 rng_;
  mutable std::unordered_map<Bits, Bits, Bits::Hash> forward_;
  mutable std::unordered_map<Bits, Bits, Bits::Hash> inverse_;
};

/// Production PRF bit: least significant bit of AES_K(N || H(block)), where
/// N is the 64-bit counter and H is SHA-256 of the block's length and bits
/// truncated to 64 bits.
class AesBitPrf final : public BitPrf {
 public:
  explicit AesBitPrf(const SymmetricKey& key) : aes_(key) {}
  bool evaluate(std::uint64_t counter, const Bits& block) const override;

 private:
  AesPermutation aes_;
};

/// Test stub: parity of the block bits. Ignores the counter.
class ParityStubPrf final : public BitPrf {
 public:
  bool evaluate(std::uint64_t, const Bits& block) const override { return block.popcount() & 1u; }
};

/// A memoized random function: each distinct (counter, block) query gets an
/// independent fair bit.
class TrueRandomBitPrf final : public BitPrf {
 public:
  explicit TrueRandomBitPrf(std::uint64_t seed) : rng_(seed) {}
  bool evaluate(std::uint64_t counter, const Bits& block) const override;
  std::size_t queries() const;

 private:
  struct Key {
    std::uint64_t counter;
    Bits block;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return Bits::Hash{}(k.block) ^ (k.counter * 0x9E3779B97F4A7C15ull);
    }
  };
  mutable std::mutex mu_;
  mutable std::mt19937_64 rng_;
  mutable std::unordered_map<Key, bool, KeyHash> memo_;
};

enum class FunctionKind { block_prp_b_bits, word_prp_r_bits, prf_to_1_bit };
enum class Flavor { production, stub, true_random };

struct KeyedFunctionSpec {
  FunctionKind kind;
  Flavor flavor;
};

/// Builds a permutation for `spec` (kind must be one of the PRP kinds).
/// Production block PRPs require width 128 and a 16-byte key; stub block
/// PRPs XOR with the first `width` key bits; stub word PRPs are the identity.
std::unique_ptr<KeyedPermutation> make_permutation(const KeyedFunctionSpec& spec,
                                                   const SymmetricKey& key, std::size_t width,
                                                   std::uint64_t seed = 0);
std::unique_ptr<BitPrf> make_bit_prf(Flavor flavor, const SymmetricKey& key,
                                     std::uint64_t seed = 0);

/// Free-function forms of the primitives.
Bits prp_apply(const KeyedPermutation& prp, const Bits& x);
Bits prp_invert(const KeyedPermutation& prp, const Bits& y);
bool prf_bit(const BitPrf& prf, std::uint64_t counter, const CoverBlock& block);
std::uint64_t counter_next(CounterState& state, std::uint64_t stride = 1);

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

}  // namespace stegolab
