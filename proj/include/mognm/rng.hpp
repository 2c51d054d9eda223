#pragma once

#include <cstdint>
#include <random>

namespace mognm {

/// SplitMix64 finaliser. Used only for deriving stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

using Engine = std::mt19937_64;

/// Deterministic, splittable random stream identifier.
///
/// A handle names a stream; it owns no generator state. `engine()` builds a
/// fresh `std::mt19937_64` whose seed is a hash of (master_seed, stream_id),
/// so identical handles reproduce identical sequences on one build and
/// distinct handles can be consumed concurrently without coordination.
/// `child(tag)` derives an independent sub-stream, e.g. one for the
/// transmitted samples and one for the channel noise of the same trial.
struct RngHandle {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  [[nodiscard]] constexpr RngHandle child(std::uint64_t tag) const noexcept {
    return {master_seed, splitmix64(stream_id ^ splitmix64(tag + 0x632BE59BD9B4E019ULL))};
  }

  [[nodiscard]] constexpr RngHandle with_stream(std::uint64_t id) const noexcept {
    return {master_seed, id};
  }

  [[nodiscard]] constexpr std::uint64_t seed() const noexcept {
    return splitmix64(master_seed ^ splitmix64(stream_id));
  }

  [[nodiscard]] Engine engine() const { return Engine(seed()); }

  friend constexpr bool operator==(const RngHandle&, const RngHandle&) = default;
};

}  // namespace mognm
