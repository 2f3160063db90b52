#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "gkf/graph_kf.hpp"
#include "gkf/gss_sim.hpp"
#include "gkf/models.hpp"
#include "gkf/training.hpp"

namespace gkf {

enum class KfrMode { kOff, kOn, kBoth };
// kExp: one-step prediction from the recorded previous true state.
// kGt: readout of the recorded true state.
enum class Oracle { kNone, kExp, kGt };

KfrMode parse_kfr_mode(std::string_view tag);
Oracle parse_oracle(std::string_view tag);
std::string_view to_string(KfrMode mode);
std::string_view to_string(Oracle oracle);

struct EvalOptions {
  KfrMode kfr = KfrMode::kBoth;
  Oracle oracle = Oracle::kNone;
  // Filter steps run before the test segment; they are not scored.
  Index warmup = 0;
  Index batch_size = 32;
  SplitFractions split;
  // Noise levels given to the filter; NaN takes them from the episode config.
  double sigma_eta = std::numeric_limits<double>::quiet_NaN();
  double sigma_nu = std::numeric_limits<double>::quiet_NaN();
};

// MSEs are per output scalar and step; RPI values are fractions.
struct ReportRow {
  std::string model;
  std::string dataset;
  double mse_prior = std::numeric_limits<double>::quiet_NaN();  // w/o KFR
  double mse_prior_std = 0.0;
  double mse_post = std::numeric_limits<double>::quiet_NaN();  // w/ KFR
  double mse_post_std = 0.0;
  double rpi_mean = std::numeric_limits<double>::quiet_NaN();
  double rpi_std = std::numeric_limits<double>::quiet_NaN();
  Index n_batches = 0;
  Index n_runs = 1;
  double runtime_s = 0.0;
};

struct RpiStats {
  std::vector<double> values;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
};

// RPI per consecutive block of `block` steps; the last block may be short.
// err_prior / err_post hold per-step squared errors ||y^- - y||^2, ||y^+ - y||^2.
RpiStats rpi_by_blocks(const Vector& err_prior, const Vector& err_post, Index block);

struct Evaluation {
  ReportRow row;
  Index t_begin = 0;  // first scored time step
  Index t_end = 0;
  Index run_begin = 0;  // first filtered time step (t_begin - warmup, at least 1)
  std::vector<double> rpi_batches;
  // Refined when KFR ran, else open-loop. Step k is time trace_begin + k;
  // filter traces start at run_begin, oracle traces at t_begin.
  GkfTrace trace;
  Index trace_begin = 0;
};

Evaluation evaluate(const GssModel& model, const Episode& episode, const EvalOptions& options,
                    const std::string& model_tag);

// Mean (and std) of MSEs across runs; RPI pooled over all runs' batches.
ReportRow aggregate(const std::vector<Evaluation>& runs);

}  // namespace gkf
