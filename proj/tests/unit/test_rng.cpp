#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gkf/rng.hpp"

namespace gkf {
namespace {

TEST(Rng, SameSeedAndStreamReproduce) {
  Rng a(42, StreamId::kInputs);
  Rng b(42, StreamId::kInputs);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DistinctStreamsDiffer) {
  Rng a(42, StreamId::kInputs);
  Rng b(42, StreamId::kStateNoise);
  Rng c(43, StreamId::kInputs);
  int equal_ab = 0;
  int equal_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto va = a.next_u64();
    equal_ab += va == b.next_u64();
    equal_ac += va == c.next_u64();
  }
  EXPECT_EQ(equal_ab, 0);
  EXPECT_EQ(equal_ac, 0);
}

TEST(Rng, StreamsAreUncorrelated) {
  const int n = 100000;
  Rng a(7, StreamId::kStateNoise);
  Rng b(7, StreamId::kReadoutNoise);
  double sab = 0.0;
  for (int i = 0; i < n; ++i) sab += a.normal() * b.normal();
  // Sample correlation of independent standard normals has sd 1/sqrt(n).
  EXPECT_LT(std::abs(sab / n), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Rng, SubstreamsAreDistinct) {
  EXPECT_NE(Rng::substream(StreamId::kInputs, 0), Rng::substream(StreamId::kInputs, 1));
  Rng a(1, Rng::substream(StreamId::kInputs, 0));
  Rng b(1, Rng::substream(StreamId::kInputs, 1));
  EXPECT_NE(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformMoments) {
  Rng rng(3, StreamId::kTest);
  const int n = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(Rng, NormalMoments) {
  Rng rng(4, StreamId::kTest);
  const int n = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal(1.0, 2.0);
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 1.0, 0.03);
  EXPECT_NEAR(sq / n - mean * mean, 4.0, 0.08);
}

TEST(Rng, PoissonMean) {
  Rng rng(5, StreamId::kTest);
  for (double rate : {0.5, 5.0, 20.0}) {
    const int n = 100000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(rate));
      sum += k;
      sq += k * k;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, rate, 4.0 * std::sqrt(rate / n));
    EXPECT_NEAR(sq / n - mean * mean, rate, 0.05 * rate);
  }
}

TEST(Rng, BelowCoversRange) {
  Rng rng(6, StreamId::kTest);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

}  // namespace
}  // namespace gkf
