#pragma once

#include <array>
#include <cstdint>

namespace obsgram {

/// Philox4x32-10 block function. Stateless: the output depends only on the
/// counter and the key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Identifies one noise stream inside a Monte Carlo campaign.
struct StreamId {
  std::uint32_t run = 0;
  std::uint32_t perturbation = 0;
  /// 0 for a nominal run, +1 / -1 for the two sides of a perturbation.
  int sign = 0;
  /// Separates unrelated consumers (simulation noise, optimizer draws).
  std::uint32_t purpose = 0;
};

/// Counter-based random source. Draw number `index` is a pure function of
/// (seed, stream, index), so samples can be generated in any order or
/// concurrently without affecting their values.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, StreamId stream);

  /// Uniform on [0, 1).
  double uniform(std::uint64_t index) const;

  /// Standard normal via Box-Muller; draws 2k and 2k+1 share a block.
  double normal(std::uint64_t index) const;

 private:
  std::array<std::uint32_t, 4> block(std::uint32_t block_index) const;

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_word1_;
  std::uint32_t stream_word2_;
  std::uint32_t stream_word3_;
};

}  // namespace obsgram
