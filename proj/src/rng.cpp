#include "obsgram/rng.hpp"

#include <cmath>
#include <numbers>

namespace obsgram {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53 random bits mapped onto (0, 1].
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, StreamId stream)
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      stream_word1_(stream.run),
      stream_word2_(stream.perturbation),
      stream_word3_((static_cast<std::uint32_t>(stream.sign + 1) & 0xFFu) |
                    (stream.purpose << 8)) {}

std::array<std::uint32_t, 4> CounterRng::block(
    std::uint32_t block_index) const {
  return philox4x32({block_index, stream_word1_, stream_word2_, stream_word3_},
                    key_);
}

double CounterRng::uniform(std::uint64_t index) const {
  const auto b = block(static_cast<std::uint32_t>(index / 2));
  const bool second = (index % 2) != 0;
  return to_open_unit(b[second ? 2 : 0], b[second ? 3 : 1]) - 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t index) const {
  const auto b = block(static_cast<std::uint32_t>(index / 2));
  const double u1 = to_open_unit(b[0], b[1]);
  const double u2 = to_open_unit(b[2], b[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (index % 2 == 0) ? radius * std::cos(angle) : radius * std::sin(angle);
}

}  // namespace obsgram
