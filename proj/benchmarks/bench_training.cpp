#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "gkf/gss_sim.hpp"
#include "gkf/replica.hpp"
#include "gkf/stgnn.hpp"

namespace {

void BM_WindowLossGrad(benchmark::State& state) {
  gkf::GeneratorConfig cfg = gkf::GeneratorConfig::lingss(1);
  cfg.steps = 600;
  const gkf::Episode ep = gkf::generate_episode(cfg);
  std::unique_ptr<gkf::GssModel> model;
  if (state.range(0) == 0) {
    model = std::make_unique<gkf::ReplicaModel>(ep.topology, gkf::ReplicaParams::lingss());
  } else {
    model = gkf::StgnnModel::random_init(ep.topology, 1).clone();
  }
  std::vector<gkf::Index> starts;
  for (gkf::Index k = 0; k < 32; ++k) starts.push_back(k * 15);
  const gkf::RowMatrix states = gkf::RowMatrix::Zero(32, model->state_dim());
  const gkf::WindowBatch batch{ep.inputs, ep.outputs, starts, states, 12};
  gkf::Vector grad;
  for (auto _ : state) benchmark::DoNotOptimize(model->window_loss(batch, &grad));
  state.SetLabel(model->family() + ", batch 32 x 12 steps");
}
BENCHMARK(BM_WindowLossGrad)->Arg(0)->Arg(1);

}  // namespace
