#include "stegolab/mq/record_log.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

namespace stegolab::mq {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kHeaderBytes = 8;
constexpr std::uint32_t kMaxRecordBytes = 256u << 20;

[[noreturn]] void fail(const std::string& what, const std::string& path) {
  throw StorageError(what + " " + path + ": " + std::strerror(errno));
}

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

void write_all(int fd, const Bytes& data, const std::string& path) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("write", path);
    }
    off += static_cast<std::size_t>(n);
  }
}

}  // namespace

std::uint32_t crc32_of(std::span<const std::uint8_t> data) {
  return static_cast<std::uint32_t>(
      ::crc32(::crc32(0L, Z_NULL, 0), data.data(), static_cast<uInt>(data.size())));
}

Bytes frame_record(std::span<const std::uint8_t> body) {
  if (body.size() > kMaxRecordBytes) throw StorageError("record too large");
  Bytes out;
  out.reserve(kHeaderBytes + body.size());
  const auto len = static_cast<std::uint32_t>(body.size());
  const std::uint32_t crc = crc32_of(body);
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(len >> s));
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(crc >> s));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

RecordLog::Loaded RecordLog::load(const std::string& path) {
  Loaded result;
  std::ifstream in(path, std::ios::binary);
  if (!in) return result;
  const Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  std::size_t pos = 0;
  while (pos < data.size()) {
    if (data.size() - pos < kHeaderBytes) break;
    const std::uint32_t len = be32(data.data() + pos);
    const std::uint32_t crc = be32(data.data() + pos + 4);
    if (len > kMaxRecordBytes || data.size() - pos - kHeaderBytes < len) break;
    std::span<const std::uint8_t> body(data.data() + pos + kHeaderBytes, len);
    if (crc32_of(body) != crc) break;
    result.records.emplace_back(body.begin(), body.end());
    pos += kHeaderBytes + len;
  }

  if (pos < data.size()) {
    std::size_t n = 0;
    std::string qpath;
    do {
      qpath = path + ".quarantine." + std::to_string(n++);
    } while (fs::exists(qpath));
    std::ofstream q(qpath, std::ios::binary);
    q.write(reinterpret_cast<const char*>(data.data() + pos),
            static_cast<std::streamsize>(data.size() - pos));
    q.close();
    if (!q) throw StorageError("cannot write quarantine file " + qpath);
    fs::resize_file(path, pos);
    result.quarantined_bytes = data.size() - pos;
    result.quarantine_path = qpath;
  }
  return result;
}

void RecordLog::rewrite(const std::string& path, const std::vector<Bytes>& records) {
  const std::string tmp = path + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
  if (fd < 0) fail("open", tmp);
  Bytes all;
  for (const auto& r : records) {
    const Bytes framed = frame_record(r);
    all.insert(all.end(), framed.begin(), framed.end());
  }
  try {
    write_all(fd, all, tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    fail("fsync", tmp);
  }
  ::close(fd);
  fs::rename(tmp, path);
}

RecordLog::RecordLog(const std::string& path, bool sync) : path_(path), sync_(sync) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0600);
  if (fd_ < 0) fail("open", path);
}

RecordLog::~RecordLog() {
  if (fd_ >= 0) ::close(fd_);
}

void RecordLog::append(const std::vector<Bytes>& bodies) {
  Bytes all;
  for (const auto& b : bodies) {
    const Bytes framed = frame_record(b);
    all.insert(all.end(), framed.begin(), framed.end());
  }
  write_all(fd_, all, path_);
  if (sync_ && ::fdatasync(fd_) != 0) fail("fdatasync", path_);
}

void RecordLog::append(std::span<const std::uint8_t> body) {
  append(std::vector<Bytes>{Bytes(body.begin(), body.end())});
}

}  // namespace stegolab::mq
