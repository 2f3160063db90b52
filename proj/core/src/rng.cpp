#include "gkf/rng.hpp"

#include <cmath>
#include <numbers>

#include "gkf/errors.hpp"

namespace gkf {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Knuth's multiplicative method; exact for the small rates used by chunking.
std::uint64_t poisson_small(Rng& rng, double rate) {
  const double limit = std::exp(-rate);
  std::uint64_t k = 0;
  double prod = rng.uniform();
  while (prod > limit) {
    ++k;
    prod *= rng.uniform();
  }
  return k;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::uint64_t mix = stream + 0x632be59bd9b4e019ULL;
  std::uint64_t x = seed ^ splitmix64(mix);
  for (auto& word : state_) word = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error("Rng::below: empty range");
  // Rejection keeps the draw unbiased.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double Rng::normal() {
  // Box-Muller, one variate per call; u1 in (0, 1].
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::poisson(double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw Error("Rng::poisson: rate must be finite and non-negative");
  }
  constexpr double kChunk = 30.0;
  std::uint64_t total = 0;
  double remaining = rate;
  while (remaining > kChunk) {
    total += poisson_small(*this, kChunk);
    remaining -= kChunk;
  }
  if (remaining > 0.0) total += poisson_small(*this, remaining);
  return total;
}

}  // namespace gkf
