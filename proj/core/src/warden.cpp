#include "stegolab/warden.hpp"

#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "stegolab/iv.hpp"
#include "stegolab/stats.hpp"
#include "stegolab/universal.hpp"

namespace stegolab {

void WardenBudget::validate() const {
  if (max_queries == 0 || max_hiddentext_bits == 0 || max_steps == 0 || trials == 0) {
    throw InvalidArgument("warden budget fields must all be positive");
  }
}

void AdvantageReport::finalize() {
  p_real = trials_real ? static_cast<double>(ones_real) / static_cast<double>(trials_real) : 0.0;
  p_ideal =
      trials_ideal ? static_cast<double>(ones_ideal) / static_cast<double>(trials_ideal) : 0.0;
  advantage = std::abs(p_real - p_ideal);
  if (trials_real == 0 || trials_ideal == 0) {
    ci95 = 1.0;
    return;
  }
  const double pooled = static_cast<double>(ones_real + ones_ideal) /
                        static_cast<double>(trials_real + trials_ideal);
  ci95 = 1.96 * std::sqrt(pooled * (1.0 - pooled) *
                          (1.0 / static_cast<double>(trials_real) +
                           1.0 / static_cast<double>(trials_ideal)));
}

MessageSource random_messages(std::size_t bits) {
  return [bits](WardenRng& rng) {
    Bits m(bits);
    for (std::size_t i = 0; i < bits; i += 64) {
      const std::uint64_t word = rng();
      for (std::size_t k = 0; k < 64 && i + k < bits; ++k) m.set(i + k, (word >> k) & 1u);
    }
    return m;
  };
}

MessageSource fixed_message(Bits message) {
  return [message = std::move(message)](WardenRng&) { return message; };
}

// ---------------------------------------------------------------------------

WardenContext::WardenContext(const WardenBudget& budget, bool real, StegoInstance& steg,
                             ChannelModel& challenge_channel, ChannelModel& reference_channel,
                             const MessageSource& messages, WardenRng& rng)
    : budget_(budget),
      real_(real),
      steg_(steg),
      challenge_channel_(challenge_channel),
      reference_channel_(reference_channel),
      messages_(messages),
      rng_(rng) {}

void WardenContext::charge_steps(std::size_t n) {
  steps_ += n;
  if (steps_ > budget_.max_steps) {
    throw BudgetExhausted("step budget of " + std::to_string(budget_.max_steps) + " exceeded");
  }
}

Stegotext WardenContext::challenge(const Bits& message) {
  if (++queries_ > budget_.max_queries) {
    throw BudgetExhausted("query budget of " + std::to_string(budget_.max_queries) +
                          " exceeded");
  }
  bits_ += message.size();
  if (bits_ > budget_.max_hiddentext_bits) {
    throw BudgetExhausted("hiddentext budget of " + std::to_string(budget_.max_hiddentext_bits) +
                          " bits exceeded");
  }
  // Both arms run the encoder: the ideal arm needs the output length.
  History scratch = challenge_history_;
  Stegotext real = steg_.encode(message, scratch);
  charge_steps(real.size());
  if (real_) {
    challenge_history_ = std::move(scratch);
    return real;
  }
  std::size_t target = 0;
  for (const auto& b : real) target += (b.bits.size() + 7) / 8;
  Stegotext ideal;
  std::size_t produced = 0;
  while (produced < target) {
    charge_steps(1);
    CoverBlock block = challenge_channel_.sample(challenge_history_);
    produced += (block.bits.size() + 7) / 8;
    challenge_history_.append(block);
    ideal.push_back(std::move(block));
  }
  return ideal;
}

Stegotext WardenContext::challenge() { return challenge(messages_(rng_)); }

std::vector<CoverBlock> WardenContext::sample_channel(std::size_t n) {
  charge_steps(n);
  std::vector<CoverBlock> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CoverBlock block = reference_channel_.sample(reference_history_);
    reference_history_.append(block);
    out.push_back(std::move(block));
  }
  return out;
}

// ---------------------------------------------------------------------------

AdvantageReport play_game(const Warden& warden, const StegoAdapter& steg,
                          const WardenBudget& budget, const MessageSource& messages,
                          const GameOptions& options) {
  budget.validate();
  if (!warden.decide) throw InvalidArgument("warden has no decision procedure");

  AdvantageReport report;
  std::mutex mu;

  auto run_trial = [&](std::uint64_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                      static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
    WardenRng rng(seq);
    const bool real = (rng() & 1u) != 0;
    auto instance = steg.instantiate(rng);
    auto challenge_channel = steg.channel(rng());
    auto reference_channel = steg.channel(rng());
    WardenContext ctx(budget, real, *instance, *challenge_channel, *reference_channel, messages,
                      rng);
    bool output = false;
    try {
      output = warden.decide(ctx);
    } catch (const BudgetExhausted& e) {
      std::lock_guard lock(mu);
      ++report.discarded;
      if (options.log) {
        options.log("trial " + std::to_string(t) + " discarded (" + (real ? "real" : "ideal") +
                    " arm): " + e.what());
      }
      return;
    }
    std::lock_guard lock(mu);
    if (real) {
      ++report.trials_real;
      report.ones_real += output;
    } else {
      ++report.trials_ideal;
      report.ones_ideal += output;
    }
  };

  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1) {
    for (std::uint64_t t = 0; t < budget.trials; ++t) run_trial(t);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::uint64_t t = w; t < budget.trials; t += threads) run_trial(t);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  report.finalize();
  return report;
}

// ---------------------------------------------------------------------------

bool BatteryReport::rejects(double alpha, const std::string& corpus) const {
  for (const auto& r : results) {
    if (r.skipped()) continue;
    if ((r.corpus == corpus || r.corpus == "both") && *r.p_value < alpha) return true;
  }
  return false;
}

std::size_t BatteryReport::skipped() const {
  std::size_t n = 0;
  for (const auto& r : results) n += r.skipped();
  return n;
}

BatteryReport distinguisher_battery(const std::vector<CoverBlock>& corpus_real,
                                    const std::vector<CoverBlock>& corpus_ideal) {
  auto common_size = [](const std::vector<CoverBlock>& corpus) -> std::optional<std::size_t> {
    if (corpus.empty()) return std::nullopt;
    for (const auto& b : corpus) {
      if (b.bits.size() != corpus.front().bits.size()) return std::nullopt;
    }
    return corpus.front().bits.size();
  };
  const auto size_real = common_size(corpus_real);
  const auto size_ideal = common_size(corpus_ideal);
  if (size_real && size_ideal && *size_real != *size_ideal) {
    throw WidthMismatch("corpora have different block sizes");
  }
  BatteryReport report;
  for (const auto* corpus : {&corpus_real, &corpus_ideal}) {
    const std::string name = corpus == &corpus_real ? "real" : "ideal";
    report.results.push_back({"monobit", name, stats::monobit(*corpus)});
    report.results.push_back({"byte_chi_square", name, stats::byte_chi_square(*corpus)});
    report.results.push_back({"serial_correlation", name, stats::serial_correlation(*corpus)});
  }
  report.results.push_back(
      {"timestamp_gap", "both", stats::timestamp_gap_comparison(corpus_real, corpus_ideal)});
  return report;
}

// ---------------------------------------------------------------------------

Warden constant_warden(bool output) {
  return {output ? "constant-1" : "constant-0", [output](WardenContext&) { return output; }};
}

Warden first_bit_warden() {
  return {"first-bit", [](WardenContext& ctx) {
            Bits ones(128);
            for (std::size_t i = 0; i < ones.size(); ++i) ones.set(i, true);
            const Stegotext s = ctx.challenge(ones);
            return !s.empty() && !s.front().bits.empty() && s.front().bits[0];
          }};
}

Warden battery_warden(std::size_t queries, double alpha) {
  return {"battery", [queries, alpha](WardenContext& ctx) {
            std::vector<CoverBlock> real;
            for (std::size_t q = 0; q < queries; ++q) {
              Stegotext s = ctx.challenge();
              real.insert(real.end(), s.begin(), s.end());
            }
            const auto reference = ctx.sample_channel(real.size());
            return distinguisher_battery(real, reference).rejects(alpha);
          }};
}

namespace {

SymmetricKey random_key(WardenRng& rng) { return SymmetricKey::random(kAesBlockBytes, rng); }

class IvInstance final : public StegoInstance {
 public:
  explicit IvInstance(std::shared_ptr<const KeyedPermutation> prp) : session_(std::move(prp)) {}
  Stegotext encode(const Bits& m, History& h) override {
    session_.set_tick(h.last_timestamp());
    Stegotext s = se_iv_message(session_, m);
    for (const auto& b : s) h.append(b);
    return s;
  }

 private:
  IvStegoSession session_;
};

class IvAdapter final : public StegoAdapter {
 public:
  explicit IvAdapter(Flavor flavor) : flavor_(flavor) {}
  std::string name() const override {
    switch (flavor_) {
      case Flavor::production: return "iv/production";
      case Flavor::true_random: return "iv/true-random";
      case Flavor::stub: return "iv/stub";
    }
    return "iv";
  }
  std::unique_ptr<ChannelModel> channel(std::uint64_t seed) const override {
    return make_uniform_channel(128, seed);
  }
  std::unique_ptr<StegoInstance> instantiate(WardenRng& rng) const override {
    const KeyedFunctionSpec spec{FunctionKind::block_prp_b_bits, flavor_};
    const SymmetricKey key = random_key(rng);
    return std::make_unique<IvInstance>(make_permutation(spec, key, 128, rng()));
  }

 private:
  Flavor flavor_;
};

class UniversalInstance final : public StegoInstance {
 public:
  explicit UniversalInstance(UniversalStegoSession session) : session_(std::move(session)) {}
  Stegotext encode(const Bits& m, History& h) override { return se_universal(session_, m, h); }

 private:
  UniversalStegoSession session_;
};

class UniversalAdapter final : public StegoAdapter {
 public:
  UniversalAdapter(std::shared_ptr<const ChannelModel> channel, Flavor flavor, EccSpec ecc)
      : channel_(std::move(channel)), flavor_(flavor), ecc_(ecc) {
    if (!channel_) throw InvalidArgument("universal adapter needs a channel");
  }
  std::string name() const override { return "universal on " + channel_->describe(); }
  std::unique_ptr<ChannelModel> channel(std::uint64_t seed) const override {
    return channel_->clone(seed);
  }
  std::unique_ptr<StegoInstance> instantiate(WardenRng& rng) const override {
    const SymmetricKey key = random_key(rng);
    std::shared_ptr<const BitPrf> prf = make_bit_prf(flavor_, key, rng());
    return std::make_unique<UniversalInstance>(
        UniversalStegoSession(std::move(prf), CounterState(0), ecc_, channel_->clone(rng())));
  }

 private:
  std::shared_ptr<const ChannelModel> channel_;
  Flavor flavor_;
  EccSpec ecc_;
};

class EcInstance final : public StegoInstance {
 public:
  EcInstance(EcStegoSession session, std::uint64_t seed)
      : session_(std::move(session)), honest_(session_.curve_ptr(), seed) {}
  Stegotext encode(const Bits& m, History& h) override {
    const std::size_t r = session_.r();
    const Bits padded = pad_to_unit(m, r);
    Stegotext out;
    for (std::size_t i = 0; i < padded.size(); i += r) {
      const auto word = static_cast<std::uint32_t>(padded.slice(i, r).to_uint());
      // On a window collision the slot carries an honest key, as the broker
      // does; the decoder skips it.
      while (true) {
        try {
          const EcEncoding enc = se_ec(session_, word);
          CoverBlock block{Bits::from_bytes(session_.curve().encode_point(enc.q)),
                           h.last_timestamp() + 1,
                           {}};
          h.append(block);
          out.push_back(std::move(block));
          break;
        } catch (const WindowCollision&) {
          CoverBlock block = honest_.sample(h);
          h.append(block);
          out.push_back(std::move(block));
        }
      }
    }
    return out;
  }

 private:
  EcStegoSession session_;
  EphemeralKeyChannel honest_;
};

class EcAdapter final : public StegoAdapter {
 public:
  EcAdapter(std::shared_ptr<const Curve> curve, unsigned r) : curve_(std::move(curve)), r_(r) {
    if (!curve_) throw InvalidArgument("ec adapter needs a curve");
  }
  std::string name() const override { return "ec on " + curve_->params().name; }
  std::unique_ptr<ChannelModel> channel(std::uint64_t seed) const override {
    return std::make_unique<EphemeralKeyChannel>(curve_, seed);
  }
  std::unique_ptr<StegoInstance> instantiate(WardenRng& rng) const override {
    const SymmetricKey key = random_key(rng);
    return std::make_unique<EcInstance>(make_ec_session(key, curve_, r_), rng());
  }

 private:
  std::shared_ptr<const Curve> curve_;
  unsigned r_;
};

class CopyBitInstance final : public StegoInstance {
 public:
  explicit CopyBitInstance(std::uint64_t seed) : channel_(128, seed) {}
  Stegotext encode(const Bits& m, History& h) override {
    Stegotext out;
    for (std::size_t i = 0; i < m.size(); i += 128) {
      CoverBlock block = channel_.sample(h);
      block.bits.set(0, m[i]);
      h.append(block);
      out.push_back(std::move(block));
    }
    return out;
  }

 private:
  UniformChannel channel_;
};

class CopyBitAdapter final : public StegoAdapter {
 public:
  std::string name() const override { return "copy-bit (broken)"; }
  std::unique_ptr<ChannelModel> channel(std::uint64_t seed) const override {
    return make_uniform_channel(128, seed);
  }
  std::unique_ptr<StegoInstance> instantiate(WardenRng& rng) const override {
    return std::make_unique<CopyBitInstance>(rng());
  }
};

class ChannelInstance final : public StegoInstance {
 public:
  ChannelInstance(std::unique_ptr<ChannelModel> channel, std::size_t blocks)
      : channel_(std::move(channel)), blocks_(blocks) {}
  Stegotext encode(const Bits&, History& h) override {
    Stegotext out;
    for (std::size_t i = 0; i < blocks_; ++i) {
      CoverBlock block = channel_->sample(h);
      h.append(block);
      out.push_back(std::move(block));
    }
    return out;
  }

 private:
  std::unique_ptr<ChannelModel> channel_;
  std::size_t blocks_;
};

class ChannelAdapter final : public StegoAdapter {
 public:
  ChannelAdapter(std::shared_ptr<const ChannelModel> channel, std::size_t blocks)
      : channel_(std::move(channel)), blocks_(blocks) {
    if (!channel_) throw InvalidArgument("channel adapter needs a channel");
  }
  std::string name() const override { return "channel passthrough on " + channel_->describe(); }
  std::unique_ptr<ChannelModel> channel(std::uint64_t seed) const override {
    return channel_->clone(seed);
  }
  std::unique_ptr<StegoInstance> instantiate(WardenRng& rng) const override {
    return std::make_unique<ChannelInstance>(channel_->clone(rng()), blocks_);
  }

 private:
  std::shared_ptr<const ChannelModel> channel_;
  std::size_t blocks_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

std::unique_ptr<StegoAdapter> iv_adapter(Flavor flavor) {
  return std::make_unique<IvAdapter>(flavor);
}

std::unique_ptr<StegoAdapter> universal_adapter(std::shared_ptr<const ChannelModel> channel,
                                                Flavor flavor, EccSpec ecc) {
  return std::make_unique<UniversalAdapter>(std::move(channel), flavor, ecc);
}

std::unique_ptr<StegoAdapter> ec_adapter(std::shared_ptr<const Curve> curve, unsigned r) {
  return std::make_unique<EcAdapter>(std::move(curve), r);
}

std::unique_ptr<StegoAdapter> copy_bit_adapter() { return std::make_unique<CopyBitAdapter>(); }

std::unique_ptr<StegoAdapter> channel_adapter(std::shared_ptr<const ChannelModel> channel,
                                              std::size_t blocks_per_message) {
  return std::make_unique<ChannelAdapter>(std::move(channel), blocks_per_message);
}

std::string to_text(const AdvantageReport& r) {
  std::ostringstream os;
  os << "trials: " << r.trials_real << " real, " << r.trials_ideal << " ideal, " << r.discarded
     << " discarded\n"
     << "p_real:    " << fmt(r.p_real) << "\n"
     << "p_ideal:   " << fmt(r.p_ideal) << "\n"
     << "advantage: " << fmt(r.advantage) << " (ci95 +/- " << fmt(r.ci95) << ")\n"
     << "note: empirical estimate against the listed warden only\n";
  return os.str();
}

std::string to_records(const AdvantageReport& r) {
  std::ostringstream os;
  os << "trials_real=" << r.trials_real << "\n"
     << "trials_ideal=" << r.trials_ideal << "\n"
     << "ones_real=" << r.ones_real << "\n"
     << "ones_ideal=" << r.ones_ideal << "\n"
     << "discarded=" << r.discarded << "\n"
     << "p_real=" << fmt(r.p_real) << "\n"
     << "p_ideal=" << fmt(r.p_ideal) << "\n"
     << "advantage=" << fmt(r.advantage) << "\n"
     << "ci95=" << fmt(r.ci95) << "\n";
  return os.str();
}

std::string to_text(const BatteryReport& report) {
  std::ostringstream os;
  for (const auto& t : report.results) {
    os << std::left << std::setw(20) << t.test << std::setw(7) << t.corpus;
    if (t.skipped()) {
      os << "skipped (corpus too small)\n";
    } else {
      os << "p=" << fmt(*t.p_value) << "\n";
    }
  }
  return os.str();
}

std::string to_records(const BatteryReport& report) {
  std::ostringstream os;
  bool first = true;
  for (const auto& t : report.results) {
    if (!first) os << "\n";
    first = false;
    os << "test=" << t.test << "\n"
       << "corpus=" << t.corpus << "\n"
       << "status=" << (t.skipped() ? "skipped" : "ran") << "\n";
    if (!t.skipped()) os << "p_value=" << fmt(*t.p_value) << "\n";
  }
  return os.str();
}

}  // namespace stegolab
