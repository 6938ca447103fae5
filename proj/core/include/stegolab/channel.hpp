#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "stegolab/bits.hpp"

namespace stegolab {

/// One channel symbol. `timestamp` is an abstract tick; `labels` holds any
/// further named parameters a channel attaches to the block.
struct CoverBlock {
  Bits bits;
  std::uint64_t timestamp = 0;
  std::map<std::string, std::int64_t> labels;

  friend bool operator==(const CoverBlock&, const CoverBlock&) = default;
};

/// An ordered sequence of blocks whose timestamps never decrease. The
/// invariant is enforced on construction and on every append.
class History {
 public:
  History() = default;
  explicit History(std::vector<CoverBlock> blocks);

  void append(CoverBlock block);
  /// Drops all but the most recent `n` blocks.
  void keep_last(std::size_t n);
  void pop_back() { blocks_.pop_back(); }

  bool empty() const { return blocks_.empty(); }
  std::size_t size() const { return blocks_.size(); }
  const CoverBlock& back() const { return blocks_.back(); }
  const std::vector<CoverBlock>& blocks() const { return blocks_; }
  /// Timestamp of the last block, or 0 for an empty history.
  std::uint64_t last_timestamp() const { return blocks_.empty() ? 0 : blocks_.back().timestamp; }

 private:
  std::vector<CoverBlock> blocks_;
};

using Stegotext = std::vector<CoverBlock>;

struct Outcome {
  Bits bits;
  double probability = 0.0;
};

/// The RNG behind every synthetic channel: a 64-bit Mersenne Twister.
/// Uniform reals are formed from the top 53 bits of one draw so the
/// sequence is identical on every standard library.
using ChannelRng = std::mt19937_64;
double uniform_unit(ChannelRng& rng);

/// A sampleable distribution over the next block given a history.
///
/// Instances own their RNG state and are exclusive-use. Two instances built
/// with the same seed and fed the same sequence of calls produce the same
/// blocks. A sampled block is stamped `h.last_timestamp() + 1`.
class ChannelModel {
 public:
  explicit ChannelModel(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  virtual ~ChannelModel() = default;
  ChannelModel(const ChannelModel&) = delete;
  ChannelModel& operator=(const ChannelModel&) = delete;

  /// Block size in bits, or nullopt for variable-length channels.
  virtual std::optional<std::size_t> block_size() const = 0;
  /// Declared lower bound on the min-entropy of every conditional
  /// next-block distribution, in bits.
  virtual double min_entropy_bound() const = 0;
  virtual std::string describe() const = 0;
  virtual std::unique_ptr<ChannelModel> clone(std::uint64_t seed) const = 0;

  /// Whether `support()` can list the conditional distribution exactly.
  virtual bool enumerable() const { return false; }
  /// The exact next-block distribution at `h`. Throws UnsupportedOperation
  /// unless `enumerable()`.
  virtual std::vector<Outcome> support(const History& h) const;

  CoverBlock sample(const History& h);

  std::uint64_t seed() const { return seed_; }
  void reseed(std::uint64_t seed) {
    seed_ = seed;
    rng_.seed(seed);
  }

 protected:
  virtual Bits draw(const History& h, ChannelRng& rng) = 0;

 private:
  std::uint64_t seed_;
  ChannelRng rng_;
};

/// Uniform distribution over k-bit blocks, history independent.
class UniformChannel final : public ChannelModel {
 public:
  UniformChannel(std::size_t bits, std::uint64_t seed);

  std::optional<std::size_t> block_size() const override { return bits_; }
  double min_entropy_bound() const override { return static_cast<double>(bits_); }
  std::string describe() const override;
  std::unique_ptr<ChannelModel> clone(std::uint64_t seed) const override;
  bool enumerable() const override { return bits_ <= kMaxEnumerableBits; }
  std::vector<Outcome> support(const History& h) const override;

  static constexpr std::size_t kMaxEnumerableBits = 16;

 protected:
  Bits draw(const History& h, ChannelRng& rng) override;

 private:
  std::size_t bits_;
};

/// Finite table channel. The unconditional table applies when the history
/// is empty or when no `given` table matches the last block; a `given`
/// table keyed by the last block makes the channel first-order Markov.
class TableChannel final : public ChannelModel {
 public:
  struct Tables {
    std::vector<Outcome> initial;
    std::map<Bits, std::vector<Outcome>> given;
  };

  TableChannel(Tables tables, std::uint64_t seed);

  std::optional<std::size_t> block_size() const override { return block_size_; }
  double min_entropy_bound() const override { return min_entropy_; }
  std::string describe() const override;
  std::unique_ptr<ChannelModel> clone(std::uint64_t seed) const override;
  bool enumerable() const override { return true; }
  std::vector<Outcome> support(const History& h) const override;

  const Tables& tables() const { return tables_; }

 protected:
  Bits draw(const History& h, ChannelRng& rng) override;

 private:
  const std::vector<Outcome>& table_for(const History& h) const;

  Tables tables_;
  std::optional<std::size_t> block_size_;
  double min_entropy_ = 0.0;
};

// Synthetic channel catalog.
std::unique_ptr<ChannelModel> make_uniform_channel(std::size_t bits, std::uint64_t seed);
/// {00: 0.45, 01: 0.25, 10: 0.20, 11: 0.10}
std::unique_ptr<ChannelModel> make_biased_channel(std::uint64_t seed);
/// {"a": 0.5, "abc": 0.5} as 8-bit ASCII strings.
std::unique_ptr<ChannelModel> make_variable_length_channel(std::uint64_t seed);

/// Restricts sampling to the next `horizon` messages whose total binary
/// length is strictly below `bit_budget`.
struct ChannelView {
  std::size_t horizon = 1;
  std::size_t bit_budget = 0;
};

/// Draws `view.horizon` blocks from the channel renormalized over the
/// sequences that fit the budget. Throws ChannelError naming the budget when
/// that restricted support is empty.
std::vector<CoverBlock> sample_view(ChannelModel& channel, const History& h,
                                    const ChannelView& view);

/// Exact joint distribution of the next `view.horizon` blocks restricted to
/// the budget and renormalized. Enumerable channels only.
std::vector<std::pair<std::vector<Bits>, double>> view_support(const ChannelModel& channel,
                                                              const History& h,
                                                              const ChannelView& view);

/// -log2 of the largest next-block probability at `h`.
double exact_min_entropy(const ChannelModel& channel, const History& h);

/// Parses the channel definition format:
///   uniform <k>
/// or a table of lines
///   [given <bitstring>] block <bitstring> p=<decimal>
/// Blank lines and lines starting with '#' are ignored. Every table must
/// sum to 1 within 1e-9.
std::unique_ptr<ChannelModel> parse_channel(std::string_view text, std::uint64_t seed);
std::unique_ptr<ChannelModel> load_channel_file(const std::string& path, std::uint64_t seed);

}  // namespace stegolab
