#include <benchmark/benchmark.h>

#include "gkf/linalg.hpp"
#include "gkf/rng.hpp"

namespace {

using gkf::Index;
using gkf::Matrix;

Matrix random_spd(Index n, std::uint64_t seed) {
  gkf::Rng rng(seed, gkf::StreamId::kTest);
  Matrix a(n, n);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return a * a.transpose() + Matrix::Identity(n, n);
}

void BM_SpdSolve(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix s = random_spd(n, 1);
  const Matrix b = Matrix::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(gkf::spd_solve(s, b));
  state.SetComplexityN(n);
}
BENCHMARK(BM_SpdSolve)->RangeMultiplier(2)->Range(8, 128)->Complexity(benchmark::oNCubed);

void BM_Bullet(benchmark::State& state) {
  const Index n = state.range(0);
  gkf::Tensor3 b(n, n, n, 0.5);
  const Matrix c = Matrix::Ones(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(gkf::bullet(b, c));
}
BENCHMARK(BM_Bullet)->Arg(12)->Arg(32);

}  // namespace
