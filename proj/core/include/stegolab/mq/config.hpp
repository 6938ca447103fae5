#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stegolab::mq {

enum class SchemeKind { iv, universal, ec };

std::string to_string(SchemeKind kind);
SchemeKind parse_scheme_kind(std::string_view text);

/// Broker settings, read from `key = value` lines:
///
///   socket_path, scheme (iv | universal | ec), key_file, peer_key_file,
///   channel_file, curve_file, r, rho, persistence_dir, max_queue_depth,
///   apps (comma separated), counter_start, peer_counter_start, fsync
///
/// Relative paths resolve against the config file's directory.
struct BrokerConfig {
  std::string socket_path;
  SchemeKind scheme = SchemeKind::iv;
  /// 16-byte key for the outbound direction.
  std::string key_file;
  /// Key of the peer's outbound direction; defaults to key_file.
  std::string peer_key_file;
  /// Cover channel for the universal scheme.
  std::string channel_file;
  /// Curve for the ec scheme; P-256 when empty.
  std::string curve_file;
  unsigned r = 8;
  std::size_t rho = 1;
  std::string persistence_dir;
  std::size_t max_queue_depth = 65536;
  std::vector<std::string> apps;
  /// Starting counters, agreed out of band with the peer.
  std::uint64_t counter_start = 0;
  std::uint64_t peer_counter_start = 0;
  /// fdatasync after every log append.
  bool fsync = false;

  /// Throws InvalidArgument when a field is out of range, a referenced file
  /// is missing or does not parse, or an app id is invalid.
  void validate() const;
  std::string to_text() const;
};

BrokerConfig parse_config(std::string_view text, const std::string& base_dir = ".");
BrokerConfig load_config(const std::string& path);

}  // namespace stegolab::mq
