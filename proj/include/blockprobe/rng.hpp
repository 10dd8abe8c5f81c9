#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace blockprobe {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// FNV-1a over the bytes of a stage label.
std::uint64_t stage_hash(std::string_view stage) noexcept;

/// Derive an independent stream seed from a parent seed.
///
/// seed = splitmix64(parent ^ splitmix64(stage_hash(stage) + splitmix64(index)))
///
/// The mapping only depends on (parent, stage, index), so adding runs or
/// stages never shifts the streams handed to existing ones.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view stage,
                          std::uint64_t index = 0) noexcept;

}  // namespace blockprobe
