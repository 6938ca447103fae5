#include "stegolab/mq/frame.hpp"

#include <algorithm>

namespace stegolab::mq {

namespace {

// Strict UTF-8: no overlong forms, no surrogates, nothing above U+10FFFF.
bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t kMinForLength[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLength[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

bool known_opcode(std::uint8_t op) {
  if (op == static_cast<std::uint8_t>(Opcode::error)) return true;
  return request_opcode(op).has_value();
}

struct Header {
  std::uint8_t opcode;
  std::size_t app_len;
};

Header check_fixed_header(std::span<const std::uint8_t> data) {
  if (data[0] != kMagic[0] || data[1] != kMagic[1]) throw ProtocolError("bad frame magic");
  if (data[2] != kVersion) {
    throw ProtocolError("unsupported protocol version " + std::to_string(data[2]));
  }
  const std::uint8_t op = data[3];
  if (!known_opcode(op)) throw ProtocolError("unknown opcode " + std::to_string(op));
  const std::size_t app_len = data[4];
  if (app_len > kMaxAppIdBytes) throw ProtocolError("app id longer than 64 bytes");
  if (app_len == 0 && op != static_cast<std::uint8_t>(Opcode::error)) {
    throw ProtocolError("empty app id");
  }
  return {op, app_len};
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

}  // namespace

void validate_app_id(std::string_view app) {
  if (app.empty() || app.size() > kMaxAppIdBytes) {
    throw ProtocolError("app id must be 1 to 64 bytes, got " + std::to_string(app.size()));
  }
  if (app.find('\0') != std::string_view::npos) throw ProtocolError("app id contains NUL");
  if (!valid_utf8(app)) throw ProtocolError("app id is not valid UTF-8");
}

bool is_reply(std::uint8_t opcode) {
  return opcode == static_cast<std::uint8_t>(Opcode::error) || (opcode & kReplyBit) != 0;
}

std::optional<Opcode> request_opcode(std::uint8_t opcode) {
  const std::uint8_t base = opcode & static_cast<std::uint8_t>(~kReplyBit);
  if (base >= 0x01 && base <= 0x05) return static_cast<Opcode>(base);
  return std::nullopt;
}

Frame make_request(Opcode op, std::string app, Bytes payload) {
  return {static_cast<std::uint8_t>(op), std::move(app), std::move(payload)};
}

Frame make_reply(Opcode op, std::string app, Bytes payload) {
  return {static_cast<std::uint8_t>(static_cast<std::uint8_t>(op) | kReplyBit), std::move(app),
          std::move(payload)};
}

Frame make_error(std::string app, std::string_view reason) {
  return {static_cast<std::uint8_t>(Opcode::error), std::move(app),
          Bytes(reason.begin(), reason.end())};
}

Bytes encode_frame(const Frame& frame) {
  if (!known_opcode(frame.opcode)) {
    throw ProtocolError("unknown opcode " + std::to_string(frame.opcode));
  }
  if (!(frame.app.empty() && frame.opcode == static_cast<std::uint8_t>(Opcode::error))) {
    validate_app_id(frame.app);
  }
  if (frame.payload.size() > kMaxPayloadBytes) throw ProtocolError("payload too large");
  ByteWriter w;
  w.u8(kMagic[0]);
  w.u8(kMagic[1]);
  w.u8(kVersion);
  w.u8(frame.opcode);
  w.u8(static_cast<std::uint8_t>(frame.app.size()));
  w.str(frame.app);
  w.u32(static_cast<std::uint32_t>(frame.payload.size()));
  w.bytes(frame.payload);
  return w.take();
}

std::optional<Frame> take_frame(Bytes& buffer) {
  if (buffer.size() < kFixedHeaderBytes) return std::nullopt;
  const Header h = check_fixed_header(buffer);
  const std::size_t len_at = kFixedHeaderBytes + h.app_len;
  if (buffer.size() < len_at + 4) return std::nullopt;
  const std::uint32_t payload_len = read_u32(buffer.data() + len_at);
  if (payload_len > kMaxPayloadBytes) throw ProtocolError("payload too large");
  const std::size_t total = len_at + 4 + payload_len;
  if (buffer.size() < total) return std::nullopt;

  Frame f;
  f.opcode = h.opcode;
  f.app.assign(reinterpret_cast<const char*>(buffer.data() + kFixedHeaderBytes), h.app_len);
  if (!f.app.empty()) validate_app_id(f.app);
  f.payload.assign(buffer.begin() + static_cast<std::ptrdiff_t>(len_at + 4),
                   buffer.begin() + static_cast<std::ptrdiff_t>(total));
  buffer.erase(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(total));
  return f;
}

Frame decode_frame(std::span<const std::uint8_t> data) {
  Bytes buffer(data.begin(), data.end());
  auto f = take_frame(buffer);
  if (!f) throw ProtocolError("truncated frame");
  if (!buffer.empty()) throw ProtocolError("trailing bytes after frame");
  return *f;
}

// ---------------------------------------------------------------------------

Bytes encode_count(std::uint32_t n) {
  ByteWriter w;
  w.u32(n);
  return w.take();
}

std::uint32_t decode_count(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const auto n = r.u32();
  r.expect_end("count");
  return n;
}

Bytes encode_blobs(const std::vector<Bytes>& items) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(items.size()));
  for (const auto& item : items) {
    w.u32(static_cast<std::uint32_t>(item.size()));
    w.bytes(item);
  }
  return w.take();
}

std::vector<Bytes> decode_blobs(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const auto n = r.u32();
  std::vector<Bytes> items;
  items.reserve(std::min<std::size_t>(n, r.remaining() / 4));
  for (std::uint32_t i = 0; i < n; ++i) {
    auto data = r.bytes(r.u32());
    items.emplace_back(data.begin(), data.end());
  }
  r.expect_end("blob list");
  return items;
}

Bytes encode_records(const std::vector<Record>& records) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(records.size()));
  for (const auto& rec : records) {
    w.u64(rec.seq);
    w.u32(static_cast<std::uint32_t>(rec.data.size()));
    w.bytes(rec.data);
  }
  return w.take();
}

std::vector<Record> decode_records(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const auto n = r.u32();
  std::vector<Record> out;
  out.reserve(std::min<std::size_t>(n, r.remaining() / 12));
  for (std::uint32_t i = 0; i < n; ++i) {
    Record rec;
    rec.seq = r.u64();
    auto data = r.bytes(r.u32());
    rec.data.assign(data.begin(), data.end());
    out.push_back(std::move(rec));
  }
  r.expect_end("record list");
  return out;
}

Bytes encode_decode_counts(const DecodeCounts& counts) {
  ByteWriter w;
  w.u32(counts.enqueued);
  w.u32(counts.skipped);
  return w.take();
}

DecodeCounts decode_decode_counts(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  DecodeCounts c;
  c.enqueued = r.u32();
  c.skipped = r.u32();
  r.expect_end("decode counts");
  return c;
}

// ---------------------------------------------------------------------------

void ByteWriter::u16(std::uint16_t v) {
  u8(static_cast<std::uint8_t>(v >> 8));
  u8(static_cast<std::uint8_t>(v));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) u8(static_cast<std::uint8_t>(v >> s));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) u8(static_cast<std::uint8_t>(v >> s));
}

std::span<const std::uint8_t> ByteReader::bytes(std::size_t n) {
  if (remaining() < n) throw ProtocolError("truncated payload");
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return bytes(1)[0]; }

std::uint16_t ByteReader::u16() {
  auto b = bytes(2);
  return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t ByteReader::u32() { return read_u32(bytes(4).data()); }

std::uint64_t ByteReader::u64() {
  auto b = bytes(8);
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

void ByteReader::expect_end(std::string_view what) const {
  if (remaining() != 0) {
    throw ProtocolError(std::to_string(remaining()) + " trailing bytes after " +
                        std::string(what));
  }
}

}  // namespace stegolab::mq
