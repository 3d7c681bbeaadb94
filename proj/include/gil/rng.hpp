#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace gil {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by (key, stream counter words); the low two counter
/// words are the block counter. Any element of any stream can be produced
/// without touching the others, which is what makes frame generation
/// order-independent.
class Philox4x32 {
public:
  using result_type = std::uint32_t;
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  static constexpr Counter bijection(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

  result_type operator()() {
    if (pos_ == 4) {
      buf_ = bijection({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                        stream_[0], stream_[1]},
                       key_);
      ++block_;
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  /// Uniform double in the open interval (0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = (*this)() >> 5; // 27 bits
    const std::uint64_t lo = (*this)() >> 6; // 26 bits
    return (static_cast<double>((hi << 26) | lo) + 0.5) * 0x1.0p-53;
  }

  /// Pair of independent standard normals (Box-Muller).
  std::array<double, 2> normal_pair() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

private:
  static constexpr std::uint32_t kM0 = 0xD2511F53;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57;
  static constexpr std::uint32_t kW0 = 0x9E3779B9;
  static constexpr std::uint32_t kW1 = 0xBB67AE85;

  Key key_;
  std::array<std::uint32_t, 2> stream_;
  std::uint64_t block_ = 0;
  Counter buf_{};
  int pos_ = 4;
};

/// Independent random substreams derived from one master seed.
enum class Substream : std::uint32_t { Speckle = 1, Noise = 2, Test = 3 };

/// Generator for item `index` of the given substream. The substream tag is
/// mixed into the key so different purposes never share counters.
inline Philox4x32 substream(std::uint64_t master_seed, Substream purpose, std::uint64_t index) {
  const std::uint64_t tag = static_cast<std::uint64_t>(purpose) * 0x9E3779B97F4A7C15ull;
  return Philox4x32(master_seed ^ tag, index);
}

} // namespace gil
