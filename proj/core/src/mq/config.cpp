#include "stegolab/mq/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "stegolab/channel.hpp"
#include "stegolab/crypto.hpp"
#include "stegolab/ec.hpp"
#include "stegolab/error.hpp"
#include "stegolab/mq/frame.hpp"
#include "stegolab/universal.hpp"

namespace stegolab::mq {

namespace fs = std::filesystem;

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::iv: return "iv";
    case SchemeKind::universal: return "universal";
    case SchemeKind::ec: return "ec";
  }
  return "?";
}

SchemeKind parse_scheme_kind(std::string_view text) {
  if (text == "iv") return SchemeKind::iv;
  if (text == "universal") return SchemeKind::universal;
  if (text == "ec") return SchemeKind::ec;
  throw ParseError("unknown scheme '" + std::string(text) + "' (expected iv, universal or ec)");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ParseError(key + ": expected an unsigned integer, got '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ParseError(key + ": expected true or false, got '" + value + "'");
}

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

BrokerConfig parse_config(std::string_view text, const std::string& base_dir) {
  BrokerConfig c;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ParseError("config line " + std::to_string(lineno) + ": duplicate key " + key);
    }
    if (key == "socket_path") {
      c.socket_path = resolve(base_dir, value);
    } else if (key == "scheme") {
      c.scheme = parse_scheme_kind(value);
    } else if (key == "key_file") {
      c.key_file = resolve(base_dir, value);
    } else if (key == "peer_key_file") {
      c.peer_key_file = resolve(base_dir, value);
    } else if (key == "channel_file") {
      c.channel_file = resolve(base_dir, value);
    } else if (key == "curve_file") {
      c.curve_file = resolve(base_dir, value);
    } else if (key == "r") {
      c.r = static_cast<unsigned>(parse_uint(key, value));
    } else if (key == "rho") {
      c.rho = parse_uint(key, value);
    } else if (key == "persistence_dir") {
      c.persistence_dir = resolve(base_dir, value);
    } else if (key == "max_queue_depth") {
      c.max_queue_depth = parse_uint(key, value);
    } else if (key == "apps") {
      std::istringstream list(value);
      std::string app;
      while (std::getline(list, app, ',')) {
        app = trim(app);
        if (!app.empty()) c.apps.push_back(app);
      }
    } else if (key == "counter_start") {
      c.counter_start = parse_uint(key, value);
    } else if (key == "peer_counter_start") {
      c.peer_counter_start = parse_uint(key, value);
    } else if (key == "fsync") {
      c.fsync = parse_bool(key, value);
    } else {
      throw ParseError("config line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  if (c.peer_key_file.empty()) c.peer_key_file = c.key_file;
  return c;
}

BrokerConfig load_config(const std::string& path) {
  const std::string base = fs::path(path).parent_path().string();
  BrokerConfig c = parse_config(read_file(path), base.empty() ? "." : base);
  c.validate();
  return c;
}

void BrokerConfig::validate() const {
  if (socket_path.empty()) throw InvalidArgument("config: socket_path is required");
  if (persistence_dir.empty()) throw InvalidArgument("config: persistence_dir is required");
  if (max_queue_depth < 1) throw InvalidArgument("config: max_queue_depth must be at least 1");
  if (apps.empty()) throw InvalidArgument("config: apps must list at least one app id");
  std::set<std::string> unique;
  for (const auto& app : apps) {
    try {
      validate_app_id(app);
    } catch (const ProtocolError& e) {
      throw InvalidArgument("config: " + std::string(e.what()));
    }
    if (!unique.insert(app).second) throw InvalidArgument("config: duplicate app " + app);
  }
  if (key_file.empty()) throw InvalidArgument("config: key_file is required");
  load_key_file(key_file, kAesBlockBytes);
  load_key_file(peer_key_file.empty() ? key_file : peer_key_file, kAesBlockBytes);

  switch (scheme) {
    case SchemeKind::iv:
      break;
    case SchemeKind::universal: {
      if (channel_file.empty()) throw InvalidArgument("config: universal needs channel_file");
      auto channel = load_channel_file(channel_file, 0);
      if (channel->min_entropy_bound() < UniversalStegoSession::kMinEntropyAdmission) {
        throw InvalidArgument("config: channel min-entropy below 1 bit");
      }
      if (rho == 0 || rho % 2 == 0) throw InvalidArgument("config: rho must be odd");
      break;
    }
    case SchemeKind::ec:
      if (r < EcStegoSession::kMinBits || r > EcStegoSession::kMaxBits) {
        throw InvalidArgument("config: r must be in [2, 15]");
      }
      if (!curve_file.empty()) validate_curve(load_curve_file(curve_file));
      break;
  }
}

std::string BrokerConfig::to_text() const {
  std::ostringstream os;
  os << "socket_path = " << socket_path << "\n"
     << "scheme = " << to_string(scheme) << "\n"
     << "key_file = " << key_file << "\n"
     << "peer_key_file = " << peer_key_file << "\n";
  if (!channel_file.empty()) os << "channel_file = " << channel_file << "\n";
  if (!curve_file.empty()) os << "curve_file = " << curve_file << "\n";
  os << "r = " << r << "\n"
     << "rho = " << rho << "\n"
     << "persistence_dir = " << persistence_dir << "\n"
     << "max_queue_depth = " << max_queue_depth << "\n"
     << "apps = ";
  for (std::size_t i = 0; i < apps.size(); ++i) os << (i ? "," : "") << apps[i];
  os << "\n"
     << "counter_start = " << counter_start << "\n"
     << "peer_counter_start = " << peer_counter_start << "\n"
     << "fsync = " << (fsync ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace stegolab::mq
