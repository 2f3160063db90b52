#include <benchmark/benchmark.h>

#include <memory>

#include "gkf/graph_kf.hpp"
#include "gkf/gss_sim.hpp"
#include "gkf/replica.hpp"
#include "gkf/stgnn.hpp"

namespace {

const gkf::Episode& episode() {
  static const gkf::Episode ep = [] {
    gkf::GeneratorConfig cfg = gkf::GeneratorConfig::nonlingss(1);
    cfg.steps = 1000;
    return gkf::generate_episode(cfg);
  }();
  return ep;
}

std::unique_ptr<gkf::GssModel> make_model(int family) {
  const gkf::Episode& ep = episode();
  if (family == 0) {
    return std::make_unique<gkf::ReplicaModel>(ep.topology, gkf::ReplicaParams::nonlingss());
  }
  return gkf::StgnnModel::random_init(ep.topology, 1).clone();
}

void BM_GkfStep(benchmark::State& state) {
  const auto model = make_model(static_cast<int>(state.range(0)));
  const gkf::GkfConfig cfg = gkf::GkfConfig::standard(*model, 0.25, 0.12);
  const gkf::Episode& ep = episode();
  const gkf::Vector x = ep.inputs.row(0).transpose();
  const gkf::Vector y = ep.outputs.row(1).transpose();
  for (auto _ : state) {
    benchmark::DoNotOptimize(gkf::gkf_step(*model, cfg, cfg.prior, x, y, gkf::TraceDetail::kSummary));
  }
  state.SetLabel(model->family());
}
BENCHMARK(BM_GkfStep)->Arg(0)->Arg(1);

void BM_GkfRun(benchmark::State& state) {
  const auto model = make_model(static_cast<int>(state.range(0)));
  const gkf::GkfConfig cfg = gkf::GkfConfig::standard(*model, 0.25, 0.12);
  const gkf::Episode& ep = episode();
  const gkf::Matrix in = ep.inputs.topRows(999);
  const gkf::Matrix out = ep.outputs.bottomRows(999);
  for (auto _ : state) benchmark::DoNotOptimize(gkf::gkf_run(*model, cfg, in, out, true));
  state.SetItemsProcessed(state.iterations() * 999);
  state.SetLabel(model->family());
}
BENCHMARK(BM_GkfRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  gkf::GeneratorConfig cfg = gkf::GeneratorConfig::lingss(2);
  cfg.steps = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(gkf::generate_episode(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace
