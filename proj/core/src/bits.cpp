#include "stegolab/bits.hpp"

#include <algorithm>
#include <bit>

#include "stegolab/error.hpp"

namespace stegolab {

Bits Bits::from_string(std::string_view text) {
  Bits out(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      out.set(i, true);
    } else if (text[i] != '0') {
      throw ParseError("bit string contains a character other than 0/1: '" +
                       std::string(text) + "'");
    }
  }
  return out;
}

Bits Bits::from_bytes(std::span<const std::uint8_t> data) {
  return from_bytes(data, data.size() * 8);
}

Bits Bits::from_bytes(std::span<const std::uint8_t> data, std::size_t nbits) {
  if (nbits > data.size() * 8) {
    throw WidthMismatch("requested more bits than the buffer holds");
  }
  Bits out(nbits);
  std::copy_n(data.begin(), out.bytes_.size(), out.bytes_.begin());
  if (nbits % 8 != 0) {
    out.bytes_.back() &= static_cast<std::uint8_t>(0xFF << (8 - nbits % 8));
  }
  return out;
}

Bits Bits::from_uint(std::uint64_t value, std::size_t width) {
  if (width > 64) {
    throw WidthMismatch("from_uint supports at most 64 bits");
  }
  Bits out(width);
  for (std::size_t i = 0; i < width; ++i) {
    out.set(i, (value >> (width - 1 - i)) & 1u);
  }
  return out;
}

void Bits::set(std::size_t i, bool value) {
  const auto mask = static_cast<std::uint8_t>(0x80u >> (i & 7));
  if (value) {
    bytes_[i >> 3] |= mask;
  } else {
    bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
  }
}

void Bits::push_back(bool value) {
  if (size_ % 8 == 0) {
    bytes_.push_back(0);
  }
  ++size_;
  set(size_ - 1, value);
}

void Bits::append(const Bits& other) {
  if (size_ % 8 == 0) {
    bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
    size_ += other.size_;
    return;
  }
  bytes_.reserve((size_ + other.size_ + 7) / 8);
  for (std::size_t i = 0; i < other.size_; ++i) {
    push_back(other.get(i));
  }
}

Bits Bits::slice(std::size_t pos, std::size_t len) const {
  if (pos + len > size_) {
    throw WidthMismatch("slice out of range");
  }
  if (pos % 8 == 0) {
    return from_bytes(std::span(bytes_).subspan(pos / 8), len);
  }
  Bits out(len);
  for (std::size_t i = 0; i < len; ++i) {
    out.set(i, get(pos + i));
  }
  return out;
}

std::uint64_t Bits::to_uint() const {
  if (size_ > 64) {
    throw WidthMismatch("to_uint supports at most 64 bits");
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < size_; ++i) {
    v = (v << 1) | static_cast<std::uint64_t>(get(i));
  }
  return v;
}

std::string Bits::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) s[i] = '1';
  }
  return s;
}

std::size_t Bits::popcount() const {
  std::size_t n = 0;
  for (auto b : bytes_) n += static_cast<std::size_t>(std::popcount(b));
  return n;
}

Bits& Bits::operator^=(const Bits& other) {
  if (other.size_ != size_) {
    throw WidthMismatch("xor of bit strings with different lengths (" +
                        std::to_string(size_) + " vs " +
                        std::to_string(other.size_) + ")");
  }
  for (std::size_t i = 0; i < bytes_.size(); ++i) bytes_[i] ^= other.bytes_[i];
  return *this;
}

std::strong_ordering operator<=>(const Bits& a, const Bits& b) {
  if (auto c = a.size_ <=> b.size_; c != 0) return c;
  return a.bytes_ <=> b.bytes_;
}

std::size_t Bits::Hash::operator()(const Bits& b) const noexcept {
  // FNV-1a over the length and storage.
  std::uint64_t h = 1469598103934665603ull ^ b.size();
  for (auto byte : b.bytes()) {
    h ^= byte;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

Bits pad_to_unit(const Bits& message, std::size_t unit) {
  if (unit == 0) {
    throw InvalidArgument("padding unit must be positive");
  }
  Bits out = message;
  out.push_back(true);
  while (out.size() % unit != 0) out.push_back(false);
  return out;
}

Bits strip_padding(const Bits& padded) {
  std::size_t n = padded.size();
  while (n > 0 && !padded.get(n - 1)) --n;
  if (n == 0) {
    throw InvalidArgument("padding terminator not found");
  }
  return padded.slice(0, n - 1);
}

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (auto b : data) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 15]);
  }
  return s;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [&](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw ParseError("invalid hex digit in '" + std::string(hex) + "'");
  };
  if (hex.size() % 2 != 0) {
    throw ParseError("hex string has odd length");
  }
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

}  // namespace stegolab
