#include "mpqkd/mc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace mpqkd::mc {

namespace {

// Stream tags keep the pairing and block simulations on disjoint substreams.
constexpr std::uint32_t kPairStream = 0x70616972;   // "pair"
constexpr std::uint32_t kBlockStream = 0x626c6b73;  // "blks"

std::mt19937_64 substream(std::uint32_t tag, std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{tag,
                    static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk),
                    static_cast<std::uint32_t>(chunk >> 32)};
  return std::mt19937_64(seq);
}

// Uniform in [0, 1) from the top 53 bits.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Calls body(chunk) for every chunk; each chunk owns its output slot.
template <class Body>
void for_each_chunk(std::uint64_t chunks, unsigned workers, const Body& body) {
  unsigned count = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
  count = static_cast<unsigned>(std::min<std::uint64_t>(count, chunks));
  if (count <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(count);
  for (unsigned t = 0; t < count; ++t) {
    pool.emplace_back([&, t] {
      for (std::uint64_t c = t; c < chunks; c += count) body(c);
    });
  }
}

std::uint64_t chunk_count(std::uint64_t n) { return (n + kChunkSize - 1) / kChunkSize; }

McEstimate proportion(std::uint64_t hits, std::uint64_t n, std::uint64_t seed) {
  McEstimate est;
  est.n = n;
  est.seed = seed;
  if (n == 0) {
    return est;
  }
  est.mean = static_cast<double>(hits) / static_cast<double>(n);
  est.std_error = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(n));
  return est;
}

}  // namespace

bool McEstimate::agrees(double expected, double k) const {
  if (std_error == 0.0) {
    return mean == expected;
  }
  return std::abs(mean - expected) <= k * std_error;
}

McEstimate mc_pair_rate(double p, std::int64_t delta, std::uint64_t n_rounds, std::uint64_t seed,
                        unsigned workers) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("mc_pair_rate requires p in (0, 1)");
  }
  if (delta < 1) {
    throw std::invalid_argument("mc_pair_rate requires delta >= 1");
  }
  if (n_rounds < kMinPairRounds) {
    throw std::invalid_argument("mc_pair_rate requires at least 1e5 rounds");
  }
  const std::uint64_t chunks = chunk_count(n_rounds);
  // Click offsets within each chunk, generated independently per substream.
  std::vector<std::vector<std::uint32_t>> clicks(chunks);
  for_each_chunk(chunks, workers, [&](std::uint64_t c) {
    auto rng = substream(kPairStream, seed, c);
    const std::uint64_t begin = c * kChunkSize;
    const std::uint64_t end = std::min(begin + kChunkSize, n_rounds);
    auto& out = clicks[c];
    out.reserve(static_cast<std::size_t>(static_cast<double>(end - begin) * p * 1.1) + 16);
    for (std::uint64_t k = begin; k < end; ++k) {
      if (uniform(rng) < p) out.push_back(static_cast<std::uint32_t>(k - begin));
    }
  });

  // Pairing runs sequentially across chunk boundaries.
  std::uint64_t pairs = 0;
  bool open = false;
  std::uint64_t open_round = 0;
  const auto window = static_cast<std::uint64_t>(delta);
  for (std::uint64_t c = 0; c < chunks; ++c) {
    const std::uint64_t base = c * kChunkSize;
    for (std::uint32_t offset : clicks[c]) {
      const std::uint64_t round = base + offset;
      if (open && round - open_round <= window) {
        ++pairs;
        open = false;
      } else {
        open = true;
        open_round = round;
      }
    }
  }
  return proportion(pairs, n_rounds, seed);
}

AdBlockEstimate mc_ad_block(double E, int b, std::uint64_t n_blocks, std::uint64_t seed,
                            unsigned workers) {
  if (!(E >= 0.0 && E <= 1.0)) {
    throw std::invalid_argument("mc_ad_block requires E in [0, 1]");
  }
  if (b < 1) {
    throw std::invalid_argument("mc_ad_block requires b >= 1");
  }
  if (n_blocks == 0) {
    throw std::invalid_argument("mc_ad_block requires at least one block");
  }
  const std::uint64_t chunks = chunk_count(n_blocks);
  std::vector<std::uint64_t> kept(chunks, 0);
  std::vector<std::uint64_t> all_error(chunks, 0);
  for_each_chunk(chunks, workers, [&](std::uint64_t c) {
    auto rng = substream(kBlockStream, seed, c);
    const std::uint64_t begin = c * kChunkSize;
    const std::uint64_t end = std::min(begin + kChunkSize, n_blocks);
    std::uint64_t ok = 0;
    std::uint64_t ones = 0;
    for (std::uint64_t k = begin; k < end; ++k) {
      int errors = 0;
      for (int i = 0; i < b; ++i) {
        errors += uniform(rng) < E ? 1 : 0;
      }
      if (errors == 0 || errors == b) {
        ++ok;
        if (errors == b) ++ones;
      }
    }
    kept[c] = ok;
    all_error[c] = ones;
  });
  std::uint64_t ok = 0;
  std::uint64_t ones = 0;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    ok += kept[c];
    ones += all_error[c];
  }
  return {proportion(ok, n_blocks, seed), proportion(ones, ok, seed)};
}

AdBlockExact enumerate_ad_block(double E, int b) {
  if (b < 1 || b > kMaxEnumerationBlock) {
    throw std::invalid_argument("enumerate_ad_block requires 1 <= b <= 20");
  }
  if (!(E >= 0.0 && E <= 1.0)) {
    throw std::invalid_argument("enumerate_ad_block requires E in [0, 1]");
  }
  const std::uint32_t patterns = std::uint32_t{1} << b;
  const std::uint32_t all_ones = patterns - 1;
  double same_zero = 0.0;
  double same_one = 0.0;
  double total = 0.0;
  for (std::uint32_t pattern = 0; pattern < patterns; ++pattern) {
    double prob = 1.0;
    for (int i = 0; i < b; ++i) {
      prob *= ((pattern >> i) & 1u) ? E : (1.0 - E);
    }
    total += prob;
    if (pattern == 0) same_zero = prob;
    if (pattern == all_ones) same_one = prob;
  }
  AdBlockExact out;
  out.q_s = same_zero + same_one;
  out.e_tilde = out.q_s > 0.0 ? same_one / out.q_s : 0.0;
  out.total = total;
  return out;
}

}  // namespace mpqkd::mc
