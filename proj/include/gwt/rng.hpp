#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gwt {

/// xoshiro256++ generator. Satisfies UniformRandomBitGenerator so it plugs
/// into the Boost.Random distributions used by the samplers.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t key) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
};

/// SplitMix64 finalizer; also used for stable hashing of stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Identifies one reproducible random sequence. Two streams with the same
/// (seed, stream_id) produce the same sequence bit-for-bit; different
/// stream ids are decorrelated through SplitMix64 key mixing.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  Xoshiro256pp engine() const noexcept {
    return Xoshiro256pp(mix64(seed) ^ mix64(stream_id ^ 0xd1b54a32d192ed03ULL));
  }

  /// Child stream keyed by `key`; children of distinct keys are distinct.
  RngStream substream(std::uint64_t key) const noexcept {
    return {seed, mix64(stream_id * 0x9e3779b97f4a7c15ULL + mix64(key))};
  }

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Uniform draw in the open interval (0, 1) on a 2^-52 lattice. With 53
/// bits the top cell midpoint 1 - 2^-54 would round to 1.
template <class Engine>
double uniform_open01(Engine& eng) {
  return (static_cast<double>(eng() >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace gwt
