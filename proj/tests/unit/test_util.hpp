#pragma once

#include <stdlib.h>

#include <filesystem>
#include <random>
#include <fstream>
#include <string>

#include "stegolab/channel.hpp"
#include "stegolab/crypto.hpp"
#include "stegolab/error.hpp"

namespace stegolab::testkit {

inline std::string data_path(const std::string& rel) { return std::string(STEGOLAB_DATA_DIR) + "/" + rel; }

/// A fresh directory under /tmp, removed on destruction.
class TempDir {
 public:
  TempDir() {
    char tmpl[] = "/tmp/stegolab-test-XXXXXX";
    if (!::mkdtemp(tmpl)) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

/// Replays a fixed list of blocks; used to hand-trace the encoders.
class ScriptedChannel final : public ChannelModel {
 public:
  ScriptedChannel(std::vector<Bits> script, std::size_t bits, double min_entropy = 1.0)
      : ChannelModel(0), script_(std::move(script)), bits_(bits), min_entropy_(min_entropy) {}
  std::optional<std::size_t> block_size() const override { return bits_; }
  double min_entropy_bound() const override { return min_entropy_; }
  std::string describe() const override { return "scripted"; }
  std::unique_ptr<ChannelModel> clone(std::uint64_t) const override {
    return std::make_unique<ScriptedChannel>(script_, bits_, min_entropy_);
  }
  std::size_t consumed() const { return next_; }

 protected:
  Bits draw(const History&, ChannelRng&) override {
    if (next_ >= script_.size()) throw ChannelError("script exhausted");
    return script_[next_++];
  }

 private:
  std::vector<Bits> script_;
  std::size_t bits_;
  double min_entropy_;
  std::size_t next_ = 0;
};

inline Bits random_bits(std::size_t n, std::mt19937_64& rng) {
  Bits b(n);
  for (std::size_t i = 0; i < n; ++i) b.set(i, rng() & 1u);
  return b;
}

}  // namespace stegolab::testkit
