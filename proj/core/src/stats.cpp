#include "stegolab/stats.hpp"

#include <algorithm>
#include <array>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>

#include "stegolab/error.hpp"

namespace stegolab::stats {

double chi_square_sf(double statistic, double df) {
  if (statistic <= 0.0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

namespace {

constexpr std::size_t kMinBits = 100;
constexpr std::size_t kMinBytes = 5 * 256;
constexpr std::size_t kMinGaps = 10;

double uniform_byte_p(const std::array<std::uint64_t, 256>& counts, std::uint64_t total) {
  const double expected = static_cast<double>(total) / 256.0;
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return chi_square_sf(stat, 255.0);
}

}  // namespace

std::optional<double> monobit(const std::vector<CoverBlock>& corpus) {
  std::uint64_t ones = 0;
  std::uint64_t total = 0;
  for (const auto& c : corpus) {
    ones += c.bits.popcount();
    total += c.bits.size();
  }
  if (total < kMinBits) return std::nullopt;
  const double s = 2.0 * static_cast<double>(ones) - static_cast<double>(total);
  return normal_two_sided(s / std::sqrt(static_cast<double>(total)));
}

std::optional<double> byte_chi_square(const std::vector<CoverBlock>& corpus) {
  std::array<std::uint64_t, 256> counts{};
  std::uint64_t total = 0;
  for (const auto& c : corpus) {
    const std::size_t whole = c.bits.size() / 8;
    for (std::size_t i = 0; i < whole; ++i) ++counts[c.bits.bytes()[i]];
    total += whole;
  }
  if (total < kMinBytes) return std::nullopt;
  return uniform_byte_p(counts, total);
}

std::optional<double> first_byte_chi_square(const std::vector<CoverBlock>& corpus) {
  std::array<std::uint64_t, 256> counts{};
  std::uint64_t total = 0;
  for (const auto& c : corpus) {
    if (c.bits.size() < 8) continue;
    ++counts[c.bits.bytes()[0]];
    ++total;
  }
  if (total < kMinBytes) return std::nullopt;
  return uniform_byte_p(counts, total);
}

std::optional<double> serial_correlation(const std::vector<CoverBlock>& corpus) {
  std::uint64_t agree = 0;
  std::uint64_t compared = 0;
  for (std::size_t k = 0; k + 1 < corpus.size(); ++k) {
    const Bits& a = corpus[k].bits;
    const Bits& b = corpus[k + 1].bits;
    const std::size_t n = std::min(a.size(), b.size());
    if (n == a.size() && n == b.size()) {
      agree += n - (a ^ b).popcount();
    } else {
      for (std::size_t i = 0; i < n; ++i) agree += a[i] == b[i];
    }
    compared += n;
  }
  if (compared < kMinBits) return std::nullopt;
  const double s = 2.0 * static_cast<double>(agree) - static_cast<double>(compared);
  return normal_two_sided(s / std::sqrt(static_cast<double>(compared)));
}

std::optional<double> timestamp_gap_comparison(const std::vector<CoverBlock>& a,
                                               const std::vector<CoverBlock>& b) {
  // Gaps of 16 or more share one category.
  constexpr std::uint64_t kCap = 16;
  auto histogram = [&](const std::vector<CoverBlock>& corpus, std::uint64_t& n) {
    std::map<std::uint64_t, std::uint64_t> h;
    for (std::size_t k = 0; k + 1 < corpus.size(); ++k) {
      const std::uint64_t t0 = corpus[k].timestamp;
      const std::uint64_t t1 = corpus[k + 1].timestamp;
      const std::uint64_t gap = t1 >= t0 ? t1 - t0 : 0;
      ++h[std::min(gap, kCap)];
      ++n;
    }
    return h;
  };
  std::uint64_t na = 0;
  std::uint64_t nb = 0;
  auto ha = histogram(a, na);
  auto hb = histogram(b, nb);
  if (na < kMinGaps || nb < kMinGaps) return std::nullopt;

  std::map<std::uint64_t, std::uint64_t> pooled;
  for (auto& [g, c] : ha) pooled[g] += c;
  for (auto& [g, c] : hb) pooled[g] += c;
  if (pooled.size() < 2) return 1.0;

  const double total = static_cast<double>(na + nb);
  double stat = 0.0;
  for (auto& [g, c] : pooled) {
    const double ea = static_cast<double>(c) * static_cast<double>(na) / total;
    const double eb = static_cast<double>(c) * static_cast<double>(nb) / total;
    const double oa = static_cast<double>(ha[g]);
    const double ob = static_cast<double>(hb[g]);
    stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  return chi_square_sf(stat, static_cast<double>(pooled.size() - 1));
}

std::vector<double> bit_position_frequencies(const std::vector<CoverBlock>& corpus) {
  if (corpus.empty()) return {};
  const std::size_t width = corpus.front().bits.size();
  std::vector<std::uint64_t> ones(width, 0);
  for (const auto& c : corpus) {
    if (c.bits.size() != width) throw WidthMismatch("corpus blocks differ in length");
    for (std::size_t i = 0; i < width; ++i) ones[i] += c.bits[i];
  }
  std::vector<double> freq(width);
  for (std::size_t i = 0; i < width; ++i) {
    freq[i] = static_cast<double>(ones[i]) / static_cast<double>(corpus.size());
  }
  return freq;
}

}  // namespace stegolab::stats
