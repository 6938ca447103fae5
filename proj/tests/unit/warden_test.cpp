#include <gtest/gtest.h>

#include "stegolab/warden.hpp"
#include "test_util.hpp"

using namespace stegolab;

namespace {

GameOptions seeded(std::uint64_t seed, unsigned threads = 1) {
  GameOptions o;
  o.seed = seed;
  o.threads = threads;
  return o;
}

WardenBudget trials(std::size_t n) {
  WardenBudget b;
  b.trials = n;
  return b;
}

std::vector<CoverBlock> blocks(std::size_t n, std::size_t bits, std::mt19937_64& rng) {
  std::vector<CoverBlock> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({testkit::random_bits(bits, rng), i + 1, {}});
  return out;
}

}  // namespace

TEST(Warden, BudgetValidation) {
  WardenBudget b;
  EXPECT_NO_THROW(b.validate());
  b.max_queries = 0;
  EXPECT_THROW(b.validate(), InvalidArgument);
}

TEST(Warden, ReportFinalize) {
  AdvantageReport r;
  r.trials_real = 100;
  r.ones_real = 80;
  r.trials_ideal = 100;
  r.ones_ideal = 30;
  r.finalize();
  EXPECT_DOUBLE_EQ(r.p_real, 0.8);
  EXPECT_DOUBLE_EQ(r.p_ideal, 0.3);
  EXPECT_NEAR(r.advantage, 0.5, 1e-12);
  // Pooled p = 0.55.
  EXPECT_NEAR(r.ci95, 1.96 * std::sqrt(0.55 * 0.45 * 0.02), 1e-12);
  AdvantageReport empty;
  empty.finalize();
  EXPECT_EQ(empty.ci95, 1.0);
}

TEST(Warden, ConstantWardensHaveZeroAdvantage) {
  auto steg = iv_adapter(Flavor::production);
  for (bool out : {false, true}) {
    const auto r = play_game(constant_warden(out), *steg, trials(200), random_messages(128));
    EXPECT_EQ(r.advantage, 0.0);
    EXPECT_EQ(r.trials_real + r.trials_ideal, 200u);
    EXPECT_EQ(r.discarded, 0u);
  }
}

TEST(Warden, CopyBitIsCaught) {
  const auto r =
      play_game(first_bit_warden(), *copy_bit_adapter(), trials(2000), random_messages(128));
  EXPECT_EQ(r.p_real, 1.0);
  EXPECT_NEAR(r.p_ideal, 0.5, 0.05);
  EXPECT_GT(r.advantage, 0.4);
}

TEST(Warden, TrueRandomIvIsIndistinguishable) {
  const auto r = play_game(battery_warden(), *iv_adapter(Flavor::true_random), trials(400),
                           random_messages(1024), seeded(3));
  EXPECT_LT(r.advantage, 0.1);
  EXPECT_EQ(r.discarded, 0u);
}

TEST(Warden, SeededRunsAreReproducibleAcrossThreadCounts) {
  auto steg = universal_adapter(make_biased_channel(0), Flavor::production);
  const auto a = play_game(battery_warden(2), *steg, trials(60), random_messages(64), seeded(9));
  const auto b = play_game(battery_warden(2), *steg, trials(60), random_messages(64),
                           seeded(9, 3));
  EXPECT_EQ(a.trials_real, b.trials_real);
  EXPECT_EQ(a.ones_real, b.ones_real);
  EXPECT_EQ(a.ones_ideal, b.ones_ideal);
}

TEST(Warden, OverBudgetTrialsAreDiscardedAndLogged) {
  Warden greedy{"greedy", [](WardenContext& ctx) {
                  for (;;) ctx.challenge();
                  return true;
                }};
  std::vector<std::string> lines;
  GameOptions opts;
  opts.log = [&](const std::string& l) { lines.push_back(l); };
  const auto r = play_game(greedy, *iv_adapter(Flavor::production), trials(10),
                           random_messages(128), opts);
  EXPECT_EQ(r.discarded, 10u);
  EXPECT_EQ(r.trials_real + r.trials_ideal, 0u);
  ASSERT_EQ(lines.size(), 10u);
  EXPECT_NE(lines[0].find("query budget"), std::string::npos);

  WardenBudget tight = trials(5);
  tight.max_hiddentext_bits = 100;
  const auto r2 = play_game(first_bit_warden(), *copy_bit_adapter(), tight, random_messages(1));
  EXPECT_EQ(r2.discarded, 5u);
}

TEST(Warden, IdealArmMatchesByteLength) {
  // On a variable-length channel the ideal arm must cover at least as many
  // bytes as the real arm produced.
  auto steg = universal_adapter(make_variable_length_channel(0), Flavor::production);
  WardenRng rng(1);
  auto inst_real = steg->instantiate(rng);
  auto inst_ideal = steg->instantiate(rng);
  auto ch1 = steg->channel(1);
  auto ch2 = steg->channel(2);
  auto ref = steg->channel(3);
  const MessageSource msgs = random_messages(32);
  WardenBudget budget;
  WardenContext real(budget, true, *inst_real, *ch1, *ref, msgs, rng);
  WardenContext ideal(budget, false, *inst_ideal, *ch2, *ref, msgs, rng);
  const Bits m = testkit::random_bits(32, rng);
  const auto bytes = [](const Stegotext& s) {
    std::size_t n = 0;
    for (const auto& b : s) n += b.bits.size() / 8;
    return n;
  };
  const Stegotext sr = real.challenge(m);
  const Stegotext si = ideal.challenge(m);
  EXPECT_EQ(sr.size(), 32u);
  EXPECT_GE(bytes(si), 32u);
  for (std::size_t i = 1; i < si.size(); ++i) EXPECT_GT(si[i].timestamp, si[i - 1].timestamp);
}

TEST(Battery, SkipsSmallCorporaAndChecksWidths) {
  std::mt19937_64 rng(1);
  const BatteryReport empty = distinguisher_battery({}, {});
  EXPECT_EQ(empty.skipped(), empty.results.size());
  EXPECT_FALSE(empty.rejects(0.01));
  EXPECT_THROW(distinguisher_battery(blocks(5, 8, rng), blocks(5, 16, rng)), WidthMismatch);
  EXPECT_NO_THROW(distinguisher_battery(blocks(200, 128, rng), {}));
}

TEST(Battery, RejectsStuckBitsButNotUniform) {
  std::mt19937_64 rng(2);
  auto real = blocks(500, 128, rng);
  const auto ideal = blocks(500, 128, rng);
  EXPECT_FALSE(distinguisher_battery(real, ideal).rejects(0.001));
  for (auto& b : real)
    for (std::size_t i = 0; i < 16; ++i) b.bits.set(i, false);
  EXPECT_TRUE(distinguisher_battery(real, ideal).rejects(0.001));
  EXPECT_FALSE(distinguisher_battery(real, ideal).rejects(0.001, "ideal"));
}

TEST(Adapters, EcOnToyCurveHandlesCollisions) {
  auto steg = ec_adapter(toy_curve(), 8);
  WardenRng rng(4);
  auto inst = steg->instantiate(rng);
  History h;
  const Stegotext s = inst->encode(testkit::random_bits(64, rng), h);
  EXPECT_GE(s.size(), 9u);
  EXPECT_EQ(h.size(), s.size());
  for (const auto& b : s) EXPECT_NO_THROW(toy_curve()->decode_point(b.bits.bytes()));
}

TEST(Adapters, ChannelPassthroughIsNullCase) {
  auto steg = channel_adapter(make_uniform_channel(128, 0), 8);
  const auto r = play_game(battery_warden(), *steg, trials(300), random_messages(64), seeded(5));
  EXPECT_LT(r.advantage, 0.1);
}

TEST(Reports, RecordsFormat) {
  AdvantageReport r;
  r.trials_real = 3;
  r.ones_real = 1;
  r.trials_ideal = 2;
  r.finalize();
  const std::string rec = to_records(r);
  EXPECT_NE(rec.find("trials_real=3\n"), std::string::npos);
  EXPECT_NE(rec.find("advantage="), std::string::npos);
  EXPECT_NE(to_text(r).find("advantage"), std::string::npos);

  const BatteryReport b = distinguisher_battery({}, {});
  const std::string brec = to_records(b);
  EXPECT_NE(brec.find("status=skipped"), std::string::npos);
  EXPECT_NE(to_text(b).find("skipped"), std::string::npos);
}
