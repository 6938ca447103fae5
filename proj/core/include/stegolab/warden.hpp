#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stegolab/bits.hpp"
#include "stegolab/channel.hpp"
#include "stegolab/crypto.hpp"
#include "stegolab/ec.hpp"
#include "stegolab/error.hpp"
#include "stegolab/universal.hpp"

namespace stegolab {

/// Limits on one warden per trial.
struct WardenBudget {
  std::size_t max_queries = 16;          // challenge-oracle calls
  std::size_t max_hiddentext_bits = 1 << 16;
  std::size_t max_steps = 1 << 20;       // blocks produced or sampled
  std::size_t trials = 10000;

  /// Throws InvalidArgument unless every field is positive.
  void validate() const;
};

class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

struct AdvantageReport {
  std::size_t trials_real = 0;
  std::size_t trials_ideal = 0;
  std::size_t ones_real = 0;
  std::size_t ones_ideal = 0;
  std::size_t discarded = 0;
  double p_real = 0.0;
  double p_ideal = 0.0;
  double advantage = 0.0;
  double ci95 = 0.0;

  /// Recomputes the derived fields from the counts.
  void finalize();
};

using WardenRng = std::mt19937_64;

/// One keyed encoder, owned by a single trial.
class StegoInstance {
 public:
  virtual ~StegoInstance() = default;
  /// Encodes `message` continuing history `h`; the returned blocks are
  /// appended to `h`.
  virtual Stegotext encode(const Bits& message, History& h) = 0;
};

/// A stegosystem as seen by the game: produces a freshly keyed instance per
/// trial.
class StegoAdapter {
 public:
  virtual ~StegoAdapter() = default;
  virtual std::string name() const = 0;
  /// The cover channel the scheme claims to imitate, seeded for one trial.
  virtual std::unique_ptr<ChannelModel> channel(std::uint64_t seed) const = 0;
  virtual std::unique_ptr<StegoInstance> instantiate(WardenRng& rng) const = 0;
};

using MessageSource = std::function<Bits(WardenRng&)>;
MessageSource random_messages(std::size_t bits);
MessageSource fixed_message(Bits message);

/// What a warden sees during one trial: a challenge oracle (stegosystem or
/// channel, unknown to the warden) and an honest channel oracle.
class WardenContext {
 public:
  WardenContext(const WardenBudget& budget, bool real, StegoInstance& steg,
                ChannelModel& challenge_channel, ChannelModel& reference_channel,
                const MessageSource& messages, WardenRng& rng);

  /// Challenge oracle on a chosen hiddentext.
  Stegotext challenge(const Bits& message);
  /// Challenge oracle on a hiddentext drawn from the game's message source.
  Stegotext challenge();
  /// `n` blocks from the honest channel, continuing its own history.
  std::vector<CoverBlock> sample_channel(std::size_t n);

  WardenRng& rng() { return rng_; }
  std::size_t queries() const { return queries_; }
  std::size_t steps() const { return steps_; }

 private:
  void charge_steps(std::size_t n);

  const WardenBudget& budget_;
  bool real_;
  StegoInstance& steg_;
  ChannelModel& challenge_channel_;
  ChannelModel& reference_channel_;
  const MessageSource& messages_;
  WardenRng& rng_;
  History challenge_history_;
  History reference_history_;
  std::size_t queries_ = 0;
  std::size_t bits_ = 0;
  std::size_t steps_ = 0;
};

struct Warden {
  std::string name;
  std::function<bool(WardenContext&)> decide;
};

struct GameOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Receives one line per discarded trial.
  std::function<void(const std::string&)> log;
};

/// Runs budget.trials independent trials. Each flips a fair coin between the
/// real arm (SE under a fresh key) and the ideal arm (channel samples of the
/// same byte length as the SE output).
AdvantageReport play_game(const Warden& warden, const StegoAdapter& steg,
                          const WardenBudget& budget, const MessageSource& messages,
                          const GameOptions& options = {});

// ---------------------------------------------------------------------------
// Distinguisher battery.

struct TestResult {
  std::string test;
  std::string corpus;  // "real", "ideal" or "both"
  std::optional<double> p_value;
  bool skipped() const { return !p_value.has_value(); }
};

struct BatteryReport {
  std::vector<TestResult> results;
  /// True when any non-skipped test on `corpus` (or a comparison test) has a
  /// p-value below alpha.
  bool rejects(double alpha, const std::string& corpus = "real") const;
  std::size_t skipped() const;
};

/// Monobit, per-byte chi-square and serial correlation on each corpus, plus a
/// timestamp-gap comparison of the two. Throws WidthMismatch when each
/// corpus has a single block size and the two sizes differ.
BatteryReport distinguisher_battery(const std::vector<CoverBlock>& corpus_real,
                                    const std::vector<CoverBlock>& corpus_ideal);

inline constexpr double kDefaultAlpha = 0.01;

// ---------------------------------------------------------------------------
// Built-in wardens and adapters.

Warden constant_warden(bool output);
/// Queries a 128-bit all-ones hiddentext and outputs bit 0 of the first block.
Warden first_bit_warden();
/// `queries` challenges from the message source plus a channel reference
/// corpus of the same size; outputs 1 when the battery rejects at alpha.
Warden battery_warden(std::size_t queries = 10, double alpha = kDefaultAlpha);

std::unique_ptr<StegoAdapter> iv_adapter(Flavor flavor);
std::unique_ptr<StegoAdapter> universal_adapter(std::shared_ptr<const ChannelModel> channel,
                                                Flavor flavor, EccSpec ecc = {});
std::unique_ptr<StegoAdapter> ec_adapter(std::shared_ptr<const Curve> curve, unsigned r);
/// Positive control on the uniform 128-bit channel: one random block per 128
/// message bits, with block bit 0 overwritten by the first bit of the chunk.
std::unique_ptr<StegoAdapter> copy_bit_adapter();
/// Negative control: the "encoder" ignores the message and samples the
/// channel, so both arms have the same distribution.
std::unique_ptr<StegoAdapter> channel_adapter(std::shared_ptr<const ChannelModel> channel,
                                              std::size_t blocks_per_message);

std::string to_text(const AdvantageReport& report);
/// One `key=value` line per field.
std::string to_records(const AdvantageReport& report);
std::string to_text(const BatteryReport& report);
/// One group of `key=value` lines per test, groups separated by blank lines.
std::string to_records(const BatteryReport& report);

}  // namespace stegolab
