#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace pbvar {

/// Stream tags keep the sampler and the simulator on disjoint substreams.
enum class Stream : std::uint32_t { posterior = 1, simulator = 2, test = 3 };

/// Engine for substream `index` of `seed`. Every draw or country gets its own
/// engine, so results do not depend on how work is split across threads.
inline std::mt19937_64 substream(std::uint64_t seed, Stream stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace pbvar
