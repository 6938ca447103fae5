#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stegolab {

using Bytes = std::vector<std::uint8_t>;

/// A bit string of arbitrary length, stored MSB-first: bit 0 is the most
/// significant bit of byte 0. Unused trailing bits of the last byte are
/// always zero, so two equal bit strings have identical byte storage.
class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t nbits) : size_(nbits), bytes_((nbits + 7) / 8, 0) {}

  /// Parses a string of '0'/'1' characters.
  static Bits from_string(std::string_view text);
  /// Takes the first `nbits` bits of `data` (all of it by default).
  static Bits from_bytes(std::span<const std::uint8_t> data);
  static Bits from_bytes(std::span<const std::uint8_t> data, std::size_t nbits);
  /// Big-endian encoding of the low `width` bits of `value` (width <= 64).
  static Bits from_uint(std::uint64_t value, std::size_t width);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool get(std::size_t i) const { return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u; }
  bool operator[](std::size_t i) const { return get(i); }
  void set(std::size_t i, bool value);
  void push_back(bool value);
  void append(const Bits& other);

  Bits slice(std::size_t pos, std::size_t len) const;

  /// Storage bytes, ceil(size/8) long, final byte zero-padded.
  std::span<const std::uint8_t> bytes() const { return bytes_; }
  /// Interprets the string as a big-endian unsigned integer (size <= 64).
  std::uint64_t to_uint() const;
  std::string to_string() const;
  std::size_t popcount() const;

  /// Requires equal sizes.
  Bits& operator^=(const Bits& other);
  friend Bits operator^(Bits lhs, const Bits& rhs) { return lhs ^= rhs; }

  friend bool operator==(const Bits&, const Bits&) = default;
  friend std::strong_ordering operator<=>(const Bits& a, const Bits& b);

  struct Hash {
    std::size_t operator()(const Bits& b) const noexcept;
  };

 private:
  std::size_t size_ = 0;
  Bytes bytes_;
};

/// Appends a single 1 bit followed by zeros until the length is a multiple of
/// `unit`. Always adds at least one bit, so an aligned input grows by a unit.
Bits pad_to_unit(const Bits& message, std::size_t unit);
/// Inverse of pad_to_unit: removes the trailing zeros and the terminating 1.
/// Throws InvalidArgument when no terminating 1 exists.
Bits strip_padding(const Bits& padded);

std::string to_hex(std::span<const std::uint8_t> data);
Bytes from_hex(std::string_view hex);

}  // namespace stegolab
