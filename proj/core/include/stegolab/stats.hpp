#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stegolab/bits.hpp"
#include "stegolab/channel.hpp"

namespace stegolab::stats {

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
double chi_square_sf(double statistic, double df);
/// Two-sided normal tail probability for a z score.
double normal_two_sided(double z);

/// Frequency (monobit) test over every bit of every block. Needs >= 100 bits.
std::optional<double> monobit(const std::vector<CoverBlock>& corpus);

/// Chi-square goodness of fit of all bytes to uniform over 0..255. Needs an
/// expected count of at least 5 per cell (1280 bytes).
std::optional<double> byte_chi_square(const std::vector<CoverBlock>& corpus);

/// Chi-square of the first byte of each block. Same size rule as above.
std::optional<double> first_byte_chi_square(const std::vector<CoverBlock>& corpus);

/// Agreement rate between bit i of block k and bit i of block k+1, which is
/// 1/2 for independent uniform blocks. Needs >= 100 compared bits.
std::optional<double> serial_correlation(const std::vector<CoverBlock>& corpus);

/// Chi-square homogeneity test on the distributions of consecutive timestamp
/// gaps in two corpora. Needs >= 10 gaps in each.
std::optional<double> timestamp_gap_comparison(const std::vector<CoverBlock>& a,
                                               const std::vector<CoverBlock>& b);

/// Fraction of ones at each bit position; blocks must share one length.
std::vector<double> bit_position_frequencies(const std::vector<CoverBlock>& corpus);

}  // namespace stegolab::stats
