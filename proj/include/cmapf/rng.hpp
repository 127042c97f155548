#pragma once

// Counter-based splittable random numbers.
//
// The block function is Threefry-2x64 with 20 rounds (Salmon et al.,
// "Parallel random numbers: as easy as 1, 2, 3"). A RngKey is the 128-bit
// Threefry key. Nothing is stateful: every value is a pure function of
// (key, counter), so identical keys give identical streams on every
// platform and in every thread.
//
//   from_seed(s)    = threefry(key = {s, 0}, counter = {0, kSeedDomain})
//   split(key, i)   = threefry(key, counter = {i, kSplitDomain})
//   stream draw n   = threefry(key, counter = {n / 2, kDrawDomain})[n % 2]
//
// The domain word keeps child keys and drawn values from ever colliding.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cmapf {

namespace detail {

inline constexpr std::uint64_t kSeedDomain = 0x5EED5EED5EED5EEDull;
inline constexpr std::uint64_t kSplitDomain = 0x5B117000000000A1ull;
inline constexpr std::uint64_t kDrawDomain = 0xD4A3000000000D1Eull;

constexpr std::uint64_t rotl64(std::uint64_t x, unsigned r) {
  return (x << r) | (x >> (64u - r));
}

}  // namespace detail

using Block = std::array<std::uint64_t, 2>;

/// Threefry-2x64-20 block function.
constexpr Block threefry2x64(Block key, Block counter) {
  constexpr std::array<unsigned, 8> kRot = {16, 42, 12, 31, 16, 32, 24, 21};
  const std::array<std::uint64_t, 3> ks = {key[0], key[1], key[0] ^ key[1] ^ 0x1BD11BDAA9FC1A22ull};
  std::uint64_t x0 = counter[0] + ks[0];
  std::uint64_t x1 = counter[1] + ks[1];
  for (unsigned round = 0; round < 20; ++round) {
    x0 += x1;
    x1 = detail::rotl64(x1, kRot[round % 8]);
    x1 ^= x0;
    if (round % 4 == 3) {
      const unsigned s = round / 4 + 1;
      x0 += ks[s % 3];
      x1 += ks[(s + 1) % 3] + s;
    }
  }
  return {x0, x1};
}

struct RngKey {
  std::uint64_t k0 = 0;
  std::uint64_t k1 = 0;

  friend bool operator==(const RngKey&, const RngKey&) = default;

  static constexpr RngKey from_seed(std::uint64_t seed) {
    const Block b = threefry2x64({seed, 0}, {0, detail::kSeedDomain});
    return {b[0], b[1]};
  }
};

constexpr RngKey split(RngKey key, std::uint64_t index) {
  const Block b = threefry2x64({key.k0, key.k1}, {index, detail::kSplitDomain});
  return {b[0], b[1]};
}

/// Children 0..n-1; child i equals split(key, i) regardless of n.
inline std::vector<RngKey> split_n(RngKey key, std::size_t n) {
  std::vector<RngKey> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(split(key, static_cast<std::uint64_t>(i)));
  return out;
}

/// Sequential draws from one key. Cheap to copy; copies replay the same values.
class RandomStream {
 public:
  explicit RandomStream(RngKey key) : key_(key) {}

  std::uint64_t next_u64() {
    const std::uint64_t n = counter_++;
    if ((n & 1u) == 0) {
      buffer_ = threefry2x64({key_.k0, key_.k1}, {n >> 1, detail::kDrawDomain});
    }
    return buffer_[n & 1u];
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n), n > 0 (Lemire's multiply-and-reject).
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates; the permutation is identical on every standard library.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  RngKey key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  RngKey key_;
  std::uint64_t counter_ = 0;
  Block buffer_{};
};

}  // namespace cmapf
