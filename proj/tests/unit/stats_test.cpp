#include <gtest/gtest.h>

#include <cmath>

#include "stegolab/stats.hpp"
#include "test_util.hpp"

using namespace stegolab;
namespace st = stegolab::stats;

namespace {

std::vector<CoverBlock> uniform_corpus(std::size_t blocks, std::size_t bits, std::mt19937_64& rng) {
  std::vector<CoverBlock> out;
  for (std::size_t i = 0; i < blocks; ++i) out.push_back({testkit::random_bits(bits, rng), i + 1, {}});
  return out;
}

std::vector<CoverBlock> with_gaps(std::size_t n, std::uint64_t gap) {
  std::vector<CoverBlock> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({Bits(8), 1 + i * gap, {}});
  return out;
}

}  // namespace

TEST(Stats, ChiSquareTailMatchesReferenceValues) {
  // Reference tails computed offline with an independent implementation.
  EXPECT_NEAR(st::chi_square_sf(300.0, 255.0), 0.02772752205390483, 1e-12);
  EXPECT_NEAR(st::chi_square_sf(10.0, 3.0), 0.01856613546304325, 1e-12);
  EXPECT_NEAR(st::chi_square_sf(5.5, 1.0), 0.019016473672300558, 1e-12);
  for (double x : {0.1, 1.0, 4.0, 20.0}) {
    EXPECT_NEAR(st::chi_square_sf(x, 2.0), std::exp(-x / 2.0), 1e-12);
  }
  EXPECT_EQ(st::chi_square_sf(0.0, 5.0), 1.0);
  EXPECT_NEAR(st::normal_two_sided(2.0), 0.04550026389635843, 1e-12);
  EXPECT_NEAR(st::normal_two_sided(-2.0), 0.04550026389635843, 1e-12);
}

TEST(Stats, MonobitHandComputed) {
  // 60 ones in 100 bits: z = (60 - 40) / 10 = 2.
  Bits b(100);
  for (int i = 0; i < 60; ++i) b.set(i, true);
  EXPECT_NEAR(*st::monobit({{b, 1, {}}}), 0.04550026389635843, 1e-12);
  EXPECT_FALSE(st::monobit({{Bits(99), 1, {}}}).has_value());
}

TEST(Stats, ByteChiSquareExtremes) {
  Bits all_values;
  for (int rep = 0; rep < 5; ++rep)
    for (unsigned v = 0; v < 256; ++v) all_values.append(Bits::from_uint(v, 8));
  EXPECT_NEAR(*st::byte_chi_square({{all_values, 1, {}}}), 1.0, 1e-12);
  EXPECT_LT(*st::byte_chi_square({{Bits(1280 * 8), 1, {}}}), 1e-100);
  EXPECT_FALSE(st::byte_chi_square({{Bits(1279 * 8), 1, {}}}).has_value());
}

TEST(Stats, FirstByteOnlyLooksAtFirstByte) {
  std::mt19937_64 rng(1);
  auto corpus = uniform_corpus(2000, 64, rng);
  for (auto& c : corpus)
    for (std::size_t i = 0; i < 8; ++i) c.bits.set(i, false);
  EXPECT_LT(*st::first_byte_chi_square(corpus), 1e-10);
  EXPECT_FALSE(st::first_byte_chi_square(uniform_corpus(100, 64, rng)).has_value());
}

TEST(Stats, SerialCorrelationDetectsRepeats) {
  std::mt19937_64 rng(2);
  const Bits b = testkit::random_bits(128, rng);
  std::vector<CoverBlock> repeated(10, CoverBlock{b, 1, {}});
  EXPECT_LT(*st::serial_correlation(repeated), 1e-10);
  EXPECT_FALSE(st::serial_correlation({{b, 1, {}}}).has_value());
}

TEST(Stats, TimestampGaps) {
  EXPECT_LT(*st::timestamp_gap_comparison(with_gaps(100, 1), with_gaps(100, 2)), 1e-10);
  EXPECT_EQ(*st::timestamp_gap_comparison(with_gaps(100, 1), with_gaps(50, 1)), 1.0);
  EXPECT_FALSE(st::timestamp_gap_comparison(with_gaps(5, 1), with_gaps(100, 1)).has_value());
}

TEST(Stats, MonobitPowerAgainstStuckBit) {
  std::mt19937_64 rng(3);
  auto corpus = uniform_corpus(10000, 128, rng);
  for (auto& c : corpus) c.bits.set(0, false);
  EXPECT_LT(*st::monobit(corpus), 1e-6);
  const auto freq = st::bit_position_frequencies(corpus);
  ASSERT_EQ(freq.size(), 128u);
  EXPECT_EQ(freq[0], 0.0);
  EXPECT_NEAR(freq[1], 0.5, 0.02);
}

TEST(Stats, NullFalseRejectionRateIsCalibrated) {
  std::mt19937_64 rng(4);
  int rejected[4] = {};
  constexpr int kRuns = 100;
  for (int run = 0; run < kRuns; ++run) {
    const auto a = uniform_corpus(200, 128, rng);
    rejected[0] += *st::monobit(a) < 0.01;
    rejected[1] += *st::byte_chi_square(a) < 0.01;
    rejected[2] += *st::first_byte_chi_square(uniform_corpus(1500, 8, rng)) < 0.01;
    rejected[3] += *st::serial_correlation(a) < 0.01;
  }
  for (int r : rejected) EXPECT_LE(r, 5);
}

TEST(Stats, BitPositionFrequenciesNeedOneWidth) {
  EXPECT_TRUE(st::bit_position_frequencies({}).empty());
  EXPECT_THROW(st::bit_position_frequencies({{Bits(8), 1, {}}, {Bits(16), 2, {}}}), WidthMismatch);
}
