#include "gwt/rng.hpp"

namespace gwt {

Xoshiro256pp::Xoshiro256pp(std::uint64_t key) noexcept {
  // Expand the key with SplitMix64; the all-zero state is unreachable.
  std::uint64_t s = key;
  for (auto& word : state_) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    word = z ^ (z >> 31);
  }
}

}  // namespace gwt
