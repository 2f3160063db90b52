#pragma once

#include <array>
#include <cstdint>

namespace gkf {

// Stream ids used across the toolkit. Per-node input streams are derived
// with Rng::substream(StreamId::kInputs, node).
enum class StreamId : std::uint64_t {
  kTopology = 1,
  kInputs = 2,
  kStateNoise = 3,
  kReadoutNoise = 4,
  kInitialState = 5,
  kShuffle = 6,
  kWeightInit = 7,
  kTest = 99,
};

// xoshiro256** seeded through splitmix64 from (seed, stream). Every derived
// draw (uniform, normal, Poisson) is computed here from raw 64-bit outputs,
// so sequences are identical across standard libraries and platforms.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);
  Rng(std::uint64_t seed, StreamId stream) : Rng(seed, static_cast<std::uint64_t>(stream)) {}

  static std::uint64_t substream(StreamId base, std::uint64_t index) {
    return (static_cast<std::uint64_t>(base) << 32) | (index & 0xffffffffULL);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  std::uint64_t poisson(double rate);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace gkf
