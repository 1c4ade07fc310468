#pragma once

#include <cstdint>

namespace mpqkd::mc {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;

  /// |mean - expected| <= k * stderr; exact equality when stderr is zero.
  bool agrees(double expected, double k = 3.0) const;
};

/// Rounds (or blocks) handled by one random substream.
inline constexpr std::uint64_t kChunkSize = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kMinPairRounds = 100'000;

/// Simulates i.i.d. clicks with probability p and pairs them: a click opens a
/// window of delta rounds; the next click inside the window closes a pair and
/// the search restarts after it, otherwise the opening click is dropped.
McEstimate mc_pair_rate(double p, std::int64_t delta, std::uint64_t n_rounds,
                        std::uint64_t seed, unsigned workers = 0);

struct AdBlockEstimate {
  McEstimate q_s;
  McEstimate e_tilde;
};

/// Samples blocks of b i.i.d. error bits; a block is kept iff all bits agree.
AdBlockEstimate mc_ad_block(double E, int b, std::uint64_t n_blocks, std::uint64_t seed,
                            unsigned workers = 0);

struct AdBlockExact {
  double q_s = 0.0;
  double e_tilde = 0.0;
  double total = 0.0;  // probability mass of all 2^b patterns
};

inline constexpr int kMaxEnumerationBlock = 20;

/// Exhaustive sum over all 2^b error patterns.
AdBlockExact enumerate_ad_block(double E, int b);

}  // namespace mpqkd::mc
