#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stegolab/bits.hpp"
#include "stegolab/error.hpp"

namespace stegolab::mq {

class StorageError : public Error {
 public:
  using Error::Error;
};

/// Append-only file of records framed as [u32 len][u32 crc32][body], both
/// integers big-endian, the checksum taken over the body.
class RecordLog {
 public:
  struct Loaded {
    std::vector<Bytes> records;
    /// Bytes moved aside because a record failed its length or checksum.
    std::size_t quarantined_bytes = 0;
    std::string quarantine_path;
  };

  /// Reads every valid record. At the first invalid one, the rest of the
  /// file is copied to `<path>.quarantine.<n>` and the log is truncated to
  /// the valid prefix. A missing file loads as empty.
  static Loaded load(const std::string& path);

  /// Replaces the file atomically with exactly `records`.
  static void rewrite(const std::string& path, const std::vector<Bytes>& records);

  RecordLog(const std::string& path, bool sync);
  ~RecordLog();
  RecordLog(const RecordLog&) = delete;
  RecordLog& operator=(const RecordLog&) = delete;

  /// Writes all records with one write call.
  void append(const std::vector<Bytes>& bodies);
  void append(std::span<const std::uint8_t> body);

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  int fd_ = -1;
  bool sync_;
};

Bytes frame_record(std::span<const std::uint8_t> body);
std::uint32_t crc32_of(std::span<const std::uint8_t> data);

}  // namespace stegolab::mq
