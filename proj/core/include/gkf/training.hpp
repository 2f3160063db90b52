#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gkf/gss_sim.hpp"
#include "gkf/models.hpp"
#include "gkf/replica.hpp"

namespace gkf {

struct SplitFractions {
  double train = 0.70;
  double val = 0.10;
  double test = 0.20;
};

// Where each training window's unroll starts.
//  kCarried: the model's own noise-free rollout from the zero prior over the
//            whole episode, refreshed once per epoch (no gradient through it).
//  kPrior:   the prior mean (zero) at every window start.
//  kFiltered: the a priori estimate s^- of a refined graph-KF run over the
//            episode with the current parameters, refreshed once per epoch.
enum class WindowStart { kCarried, kPrior, kFiltered };

struct TrainConfig {
  Index epochs = 100;
  double lr = 0.01;
  Index batch_size = 32;
  Index window = 12;
  Index patience = 10;
  SplitFractions split;
  std::uint64_t seed = 0;
  WindowStart window_start = WindowStart::kFiltered;

  void validate() const;
};

// Filtered for the scalar Replica-style models, carried otherwise.
WindowStart default_window_start(const GssModel& model);
std::string_view to_string(WindowStart mode);
WindowStart parse_window_start(std::string_view tag);

struct Segment {
  Index begin = 0;
  Index end = 0;

  Index size() const { return end - begin; }
};

// Chronological train/val/test segments and the stride-1 window starts
// inside each; no window crosses a segment boundary.
struct WindowSet {
  Segment train;
  Segment val;
  Segment test;
  std::vector<Index> train_starts;
  std::vector<Index> val_starts;
  std::vector<Index> test_starts;
};

WindowSet make_windows(Index steps, const TrainConfig& cfg);
WindowSet make_windows(const Episode& episode, const TrainConfig& cfg);

struct TrainReport {
  std::vector<double> train_mse;  // entry e - 1 for epoch e
  std::vector<double> val_mse;    // entry 0 before training, entry e after epoch e
  Index best_epoch = 0;
  double best_val_mse = 0.0;
  double test_mse = 0.0;
  bool stopped_early = false;
  Vector params;  // best-validation parameters, also written back to the model
};

// Window-start states for every window in `starts` under cfg.window_start.
RowMatrix window_start_states(const GssModel& model, const Episode& episode,
                              std::span<const Index> starts, WindowStart mode);

// Mean squared a priori error over the given windows.
double windowed_mse(const GssModel& model, const Episode& episode, std::span<const Index> starts,
                    const TrainConfig& cfg);

// Flips the sign of psi1 to match the sign of the covariance between the
// outputs and the model's noise-free rollout. Inputs enter the state with a
// fixed sign, so a readout of the wrong sign cannot be repaired by training.
void align_readout_sign(ScalarMixingModel& model, const Episode& episode);

// Adam on the window MSE with early stopping on validation MSE; leaves the
// best-validation parameters in `model`.
TrainReport train(GssModel& model, const Episode& episode, const TrainConfig& cfg);

}  // namespace gkf
