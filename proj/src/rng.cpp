#include "blockprobe/rng.hpp"

namespace blockprobe {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stage_hash(std::string_view stage) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stage) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view stage,
                          std::uint64_t index) noexcept {
  return splitmix64(parent ^ splitmix64(stage_hash(stage) + splitmix64(index)));
}

}  // namespace blockprobe
