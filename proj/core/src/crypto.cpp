#include "stegolab/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <numeric>

#include "stegolab/error.hpp"

namespace stegolab {

SymmetricKey SymmetricKey::random(std::size_t nbytes, std::mt19937_64& rng) {
  Bytes b(nbytes);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return SymmetricKey(std::move(b));
}

SymmetricKey SymmetricKey::generate(std::size_t nbytes) {
  Bytes b(nbytes);
  if (RAND_bytes(b.data(), static_cast<int>(b.size())) != 1) {
    throw Error("RAND_bytes failed");
  }
  return SymmetricKey(std::move(b));
}

SymmetricKey load_key_file(const std::string& path, std::size_t expected_bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open key file '" + path + "'");
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() != expected_bytes) {
    throw ParseError("key file '" + path + "' holds " + std::to_string(data.size()) +
                     " bytes, expected " + std::to_string(expected_bytes));
  }
  return SymmetricKey(std::move(data));
}

void save_key_file(const std::string& path, const SymmetricKey& key) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write key file '" + path + "'");
  out.write(reinterpret_cast<const char*>(key.bytes().data()),
            static_cast<std::streamsize>(key.bytes().size()));
}

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

SymmetricKey derive_subkey(const SymmetricKey& master, std::string_view label) {
  const auto digest =
      sha256(std::span(reinterpret_cast<const std::uint8_t*>(label.data()), label.size()));
  AesPermutation aes(master);
  AesPermutation::Block in{};
  std::copy_n(digest.begin(), in.size(), in.begin());
  const auto out = aes.encrypt_block(in);
  return SymmetricKey(Bytes(out.begin(), out.end()));
}

// ---------------------------------------------------------------------------

CounterState::CounterState(std::uint64_t value, unsigned width) : value_(value), width_(width) {
  if (width == 0 || width > 64) {
    throw InvalidArgument("counter width must be in [1, 64]");
  }
  if (width < 64 && value >= (std::uint64_t{1} << width)) {
    throw InvalidArgument("counter start does not fit in " + std::to_string(width) + " bits");
  }
}

bool CounterState::can_advance(std::uint64_t stride) const {
  // value + stride < 2^width, without overflowing 64-bit arithmetic.
  const std::uint64_t max = width_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width_) - 1;
  return stride <= max - value_;
}

std::uint64_t CounterState::next(std::uint64_t stride) {
  if (!can_advance(stride)) {
    throw CounterOverflow("counter at " + std::to_string(value_) + " cannot advance by " +
                          std::to_string(stride) + " within " + std::to_string(width_) +
                          " bits; rekey before further use");
  }
  const std::uint64_t prev = value_;
  value_ += stride;
  return prev;
}

// ---------------------------------------------------------------------------

void KeyedPermutation::check_width(const Bits& x) const {
  if (x.size() != width()) {
    throw WidthMismatch("permutation expects " + std::to_string(width()) + " bits, got " +
                        std::to_string(x.size()));
  }
}

std::uint64_t KeyedPermutation::apply_word(std::uint64_t x) const {
  return apply(Bits::from_uint(x, width())).to_uint();
}

std::uint64_t KeyedPermutation::invert_word(std::uint64_t y) const {
  return invert(Bits::from_uint(y, width())).to_uint();
}

struct AesPermutation::Contexts {
  std::mutex mu;
  EVP_CIPHER_CTX* enc = nullptr;
  EVP_CIPHER_CTX* dec = nullptr;
};

AesPermutation::AesPermutation(const SymmetricKey& key) : ctx_(std::make_unique<Contexts>()) {
  if (key.bytes().size() != 16) {
    throw WidthMismatch("AES-128 needs a 16-byte key, got " +
                        std::to_string(key.bytes().size()) + " bytes");
  }
  ctx_->enc = EVP_CIPHER_CTX_new();
  ctx_->dec = EVP_CIPHER_CTX_new();
  if (!ctx_->enc || !ctx_->dec ||
      EVP_EncryptInit_ex(ctx_->enc, EVP_aes_128_ecb(), nullptr, key.bytes().data(), nullptr) != 1 ||
      EVP_DecryptInit_ex(ctx_->dec, EVP_aes_128_ecb(), nullptr, key.bytes().data(), nullptr) != 1) {
    EVP_CIPHER_CTX_free(ctx_->enc);
    EVP_CIPHER_CTX_free(ctx_->dec);
    throw Error("AES context initialization failed");
  }
  EVP_CIPHER_CTX_set_padding(ctx_->enc, 0);
  EVP_CIPHER_CTX_set_padding(ctx_->dec, 0);
}

AesPermutation::~AesPermutation() {
  if (ctx_) {
    EVP_CIPHER_CTX_free(ctx_->enc);
    EVP_CIPHER_CTX_free(ctx_->dec);
  }
}

AesPermutation::Block AesPermutation::encrypt_block(const Block& in) const {
  Block out{};
  int len = 0;
  std::lock_guard lock(ctx_->mu);
  if (EVP_EncryptUpdate(ctx_->enc, out.data(), &len, in.data(), static_cast<int>(in.size())) != 1 ||
      len != static_cast<int>(out.size())) {
    throw Error("AES encryption failed");
  }
  return out;
}

AesPermutation::Block AesPermutation::decrypt_block(const Block& in) const {
  Block out{};
  int len = 0;
  std::lock_guard lock(ctx_->mu);
  if (EVP_DecryptUpdate(ctx_->dec, out.data(), &len, in.data(), static_cast<int>(in.size())) != 1 ||
      len != static_cast<int>(out.size())) {
    throw Error("AES decryption failed");
  }
  return out;
}

Bits AesPermutation::apply(const Bits& x) const {
  check_width(x);
  Block in{};
  std::copy_n(x.bytes().begin(), in.size(), in.begin());
  const auto out = encrypt_block(in);
  return Bits::from_bytes(out);
}

Bits AesPermutation::invert(const Bits& y) const {
  check_width(y);
  Block in{};
  std::copy_n(y.bytes().begin(), in.size(), in.begin());
  const auto out = decrypt_block(in);
  return Bits::from_bytes(out);
}

Bits XorStubPermutation::apply(const Bits& x) const {
  check_width(x);
  return x ^ key_;
}

Bits IdentityPermutation::apply(const Bits& x) const {
  check_width(x);
  return x;
}

RankedPermutation::RankedPermutation(const SymmetricKey& key, std::size_t width) : width_(width) {
  if (width == 0 || width > kMaxWidth) {
    throw InvalidArgument("ranked permutation width must be in [1, " +
                          std::to_string(kMaxWidth) + "]");
  }
  AesPermutation aes(key);
  const std::size_t n = std::size_t{1} << width;
  std::vector<std::pair<AesPermutation::Block, std::uint32_t>> ranked(n);
  for (std::uint32_t x = 0; x < n; ++x) {
    AesPermutation::Block in{};
    in[0] = 'W';  // domain tag: word permutation
    for (int i = 0; i < 4; ++i) in[15 - i] = static_cast<std::uint8_t>(x >> (8 * i));
    ranked[x] = {aes.encrypt_block(in), x};
  }
  std::sort(ranked.begin(), ranked.end());
  forward_.resize(n);
  inverse_.resize(n);
  for (std::uint32_t rank = 0; rank < n; ++rank) {
    forward_[ranked[rank].second] = rank;
    inverse_[rank] = ranked[rank].second;
  }
}

Bits RankedPermutation::apply(const Bits& x) const {
  check_width(x);
  return Bits::from_uint(forward_[x.to_uint()], width_);
}

Bits RankedPermutation::invert(const Bits& y) const {
  check_width(y);
  return Bits::from_uint(inverse_[y.to_uint()], width_);
}

TrueRandomPermutation::TrueRandomPermutation(std::size_t width, std::uint64_t seed)
    : width_(width), rng_(seed) {
  if (width == 0) throw InvalidArgument("permutation width must be positive");
}

Bits TrueRandomPermutation::fresh(const std::unordered_map<Bits, Bits, Bits::Hash>& taken) const {
  if (width_ < 64 && taken.size() >= (std::size_t{1} << width_)) {
    throw Error("random permutation domain exhausted");
  }
  for (;;) {
    Bytes buf((width_ + 7) / 8);
    for (auto& b : buf) b = static_cast<std::uint8_t>(rng_());
    Bits candidate = Bits::from_bytes(buf, width_);
    if (!taken.contains(candidate)) return candidate;
  }
}

Bits TrueRandomPermutation::apply(const Bits& x) const {
  check_width(x);
  std::lock_guard lock(mu_);
  if (auto it = forward_.find(x); it != forward_.end()) return it->second;
  Bits y = fresh(inverse_);
  forward_.emplace(x, y);
  inverse_.emplace(y, x);
  return y;
}

Bits TrueRandomPermutation::invert(const Bits& y) const {
  check_width(y);
  std::lock_guard lock(mu_);
  if (auto it = inverse_.find(y); it != inverse_.end()) return it->second;
  Bits x = fresh(forward_);
  forward_.emplace(x, y);
  inverse_.emplace(y, x);
  return x;
}

std::size_t TrueRandomPermutation::queries() const {
  std::lock_guard lock(mu_);
  return forward_.size();
}

// ---------------------------------------------------------------------------

bool AesBitPrf::evaluate(std::uint64_t counter, const Bits& block) const {
  Bytes material(8);
  const std::uint64_t len = block.size();
  for (int i = 0; i < 8; ++i) material[7 - i] = static_cast<std::uint8_t>(len >> (8 * i));
  material.insert(material.end(), block.bytes().begin(), block.bytes().end());
  const auto digest = sha256(material);

  AesPermutation::Block in{};
  for (int i = 0; i < 8; ++i) in[7 - i] = static_cast<std::uint8_t>(counter >> (8 * i));
  std::copy_n(digest.begin(), 8, in.begin() + 8);
  return aes_.encrypt_block(in)[15] & 1u;
}

bool TrueRandomBitPrf::evaluate(std::uint64_t counter, const Bits& block) const {
  std::lock_guard lock(mu_);
  auto [it, inserted] = memo_.try_emplace(Key{counter, block}, false);
  if (inserted) it->second = rng_() & 1u;
  return it->second;
}

std::size_t TrueRandomBitPrf::queries() const {
  std::lock_guard lock(mu_);
  return memo_.size();
}

// ---------------------------------------------------------------------------

std::unique_ptr<KeyedPermutation> make_permutation(const KeyedFunctionSpec& spec,
                                                   const SymmetricKey& key, std::size_t width,
                                                   std::uint64_t seed) {
  if (spec.kind == FunctionKind::prf_to_1_bit) {
    throw InvalidArgument("make_permutation called with a PRF spec");
  }
  switch (spec.flavor) {
    case Flavor::true_random:
      return std::make_unique<TrueRandomPermutation>(width, seed);
    case Flavor::stub:
      if (spec.kind == FunctionKind::word_prp_r_bits) {
        return std::make_unique<IdentityPermutation>(width);
      }
      if (key.size_bits() < width) {
        throw WidthMismatch("stub key has fewer bits than the block width");
      }
      return std::make_unique<XorStubPermutation>(Bits::from_bytes(key.bytes(), width));
    case Flavor::production:
      if (spec.kind == FunctionKind::word_prp_r_bits) {
        return std::make_unique<RankedPermutation>(key, width);
      }
      if (width != 128) {
        throw WidthMismatch("production block PRP is AES-128; width must be 128");
      }
      return std::make_unique<AesPermutation>(key);
  }
  throw InvalidArgument("unknown flavor");
}

std::unique_ptr<BitPrf> make_bit_prf(Flavor flavor, const SymmetricKey& key, std::uint64_t seed) {
  switch (flavor) {
    case Flavor::production:
      return std::make_unique<AesBitPrf>(key);
    case Flavor::stub:
      return std::make_unique<ParityStubPrf>();
    case Flavor::true_random:
      return std::make_unique<TrueRandomBitPrf>(seed);
  }
  throw InvalidArgument("unknown flavor");
}

Bits prp_apply(const KeyedPermutation& prp, const Bits& x) { return prp.apply(x); }
Bits prp_invert(const KeyedPermutation& prp, const Bits& y) { return prp.invert(y); }

bool prf_bit(const BitPrf& prf, std::uint64_t counter, const CoverBlock& block) {
  return prf(counter, block);
}

std::uint64_t counter_next(CounterState& state, std::uint64_t stride) {
  return state.next(stride);
}

}  // namespace stegolab
