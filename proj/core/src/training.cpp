#include "gkf/training.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "gkf/diffable.hpp"
#include "gkf/errors.hpp"
#include "gkf/graph_kf.hpp"
#include "gkf/rng.hpp"

namespace gkf {
namespace {

std::vector<Index> starts_in(const Segment& seg, Index window, const char* name) {
  std::vector<Index> out;
  if (seg.size() == 0) return out;
  if (seg.size() < window) {
    throw DataError(std::string(name) + " segment has " + std::to_string(seg.size()) +
                    " steps, shorter than the window of " + std::to_string(window));
  }
  for (Index t = seg.begin; t + window <= seg.end; ++t) out.push_back(t);
  return out;
}

RowMatrix rows_at(const RowMatrix& states, std::span<const Index> starts) {
  RowMatrix out(static_cast<Index>(starts.size()), states.cols());
  for (std::size_t b = 0; b < starts.size(); ++b) {
    out.row(static_cast<Index>(b)) = states.row(starts[b]);
  }
  return out;
}

void check_episode(const GssModel& model, const Episode& episode) {
  if (episode.inputs.cols() != model.input_dim() || episode.outputs.cols() != model.output_dim()) {
    throw DataError("episode dimensions do not match the model (" +
                    std::to_string(episode.inputs.cols()) + " input columns, model expects " +
                    std::to_string(model.input_dim()) + ")");
  }
}

RowMatrix rollout_states(const GssModel& model, const Episode& episode, WindowStart mode) {
  if (mode == WindowStart::kPrior) {
    return RowMatrix::Zero(episode.steps(), model.state_dim());
  }
  if (mode == WindowStart::kFiltered) {
    // Row t is s^-_t, which has seen outputs up to t - 1 only.
    const GkfConfig cfg =
        GkfConfig::standard(model, episode.config.sigma_eta, episode.config.sigma_nu);
    const Index T = episode.steps();
    const GkfTrace trace = gkf_run(model, cfg, episode.inputs.topRows(T - 1),
                                   episode.outputs.bottomRows(T - 1), true);
    RowMatrix states(T, model.state_dim());
    states.row(0) = cfg.prior.mean.transpose();
    for (Index t = 1; t < T; ++t) {
      states.row(t) = trace.steps[static_cast<std::size_t>(t - 1)].s_prior.transpose();
    }
    return states;
  }
  const RowMatrix states =
      free_run(model, episode.inputs.topRows(episode.steps() - 1), Vector::Zero(model.state_dim()));
  return states;
}

double loss_over(const GssModel& model, const Episode& episode, const RowMatrix& states,
                 std::span<const Index> starts, Index window) {
  if (starts.empty()) return std::numeric_limits<double>::quiet_NaN();
  const RowMatrix start_states = rows_at(states, starts);
  return model.window_loss({episode.inputs, episode.outputs, starts, start_states, window}, nullptr);
}

}  // namespace

WindowStart default_window_start(const GssModel& model) {
  return dynamic_cast<const ScalarMixingModel*>(&model) ? WindowStart::kFiltered
                                                         : WindowStart::kCarried;
}

std::string_view to_string(WindowStart mode) {
  switch (mode) {
    case WindowStart::kCarried: return "carried";
    case WindowStart::kPrior: return "prior";
    case WindowStart::kFiltered: return "filtered";
  }
  return "filtered";
}

WindowStart parse_window_start(std::string_view tag) {
  if (tag == "carried") return WindowStart::kCarried;
  if (tag == "prior") return WindowStart::kPrior;
  if (tag == "filtered") return WindowStart::kFiltered;
  throw DataError("unknown window start '" + std::string(tag) +
                  "' (expected carried, prior or filtered)");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw DataError("epochs must be non-negative");
  if (!(lr > 0.0)) throw DataError("learning rate must be positive");
  if (batch_size < 1) throw DataError("batch size must be positive");
  if (window < 1) throw DataError("window must be at least 1");
  if (patience < 1) throw DataError("patience must be at least 1");
  const double sum = split.train + split.val + split.test;
  if (split.train < 0 || split.val < 0 || split.test < 0 || std::abs(sum - 1.0) > 1e-9) {
    throw DataError("split fractions must be non-negative and sum to 1");
  }
}

WindowSet make_windows(Index steps, const TrainConfig& cfg) {
  cfg.validate();
  const auto n_train = static_cast<Index>(std::llround(cfg.split.train * static_cast<double>(steps)));
  const auto n_val = static_cast<Index>(std::llround(cfg.split.val * static_cast<double>(steps)));
  if (n_train + n_val > steps) throw DataError("split rounds to more steps than available");
  WindowSet w;
  w.train = {0, n_train};
  w.val = {n_train, n_train + n_val};
  w.test = {n_train + n_val, steps};
  w.train_starts = starts_in(w.train, cfg.window, "train");
  w.val_starts = starts_in(w.val, cfg.window, "validation");
  w.test_starts = starts_in(w.test, cfg.window, "test");
  return w;
}

WindowSet make_windows(const Episode& episode, const TrainConfig& cfg) {
  return make_windows(episode.steps(), cfg);
}

RowMatrix window_start_states(const GssModel& model, const Episode& episode,
                              std::span<const Index> starts, WindowStart mode) {
  check_episode(model, episode);
  return rows_at(rollout_states(model, episode, mode), starts);
}

double windowed_mse(const GssModel& model, const Episode& episode, std::span<const Index> starts,
                    const TrainConfig& cfg) {
  check_episode(model, episode);
  return loss_over(model, episode, rollout_states(model, episode, cfg.window_start), starts,
                   cfg.window);
}

void align_readout_sign(ScalarMixingModel& model, const Episode& episode) {
  check_episode(model, episode);
  const RowMatrix states = rollout_states(model, episode, WindowStart::kCarried);
  const Index T = episode.steps();
  const double s_mean = states.mean();
  const double y_mean = episode.outputs.mean();
  double cov = 0.0;
  for (Index t = 0; t < T; ++t) {
    for (Index v = 0; v < states.cols(); ++v) {
      cov += (states(t, v) - s_mean) * (episode.outputs(t, v) - y_mean);
    }
  }
  Vector params = model.params();
  const Index psi1 = params.size() - 1;
  if ((cov < 0.0) != (params(psi1) < 0.0)) {
    params(psi1) = -params(psi1);
    model.set_params(params);
  }
}

TrainReport train(GssModel& model, const Episode& episode, const TrainConfig& cfg) {
  cfg.validate();
  check_episode(model, episode);
  const WindowSet windows = make_windows(episode, cfg);
  if (windows.train_starts.empty()) throw DataError("no training windows");
  // Without a validation segment, model selection falls back to training windows.
  const std::vector<Index>& select_starts =
      windows.val_starts.empty() ? windows.train_starts : windows.val_starts;

  Rng shuffle_rng(cfg.seed, StreamId::kShuffle);
  Vector params = model.params();
  AdamState adam(params.size(), cfg.lr);

  TrainReport report;
  RowMatrix states = rollout_states(model, episode, cfg.window_start);
  report.val_mse.push_back(loss_over(model, episode, states, select_starts, cfg.window));
  report.best_val_mse = report.val_mse.front();
  report.best_epoch = 0;
  Vector best_params = params;

  std::vector<Index> order = windows.train_starts;
  Index since_best = 0;
  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle_rng.below(i));
      std::swap(order[i - 1], order[j]);
    }
    double loss_sum = 0.0;
    Index batch_id = 0;
    for (std::size_t first = 0; first < order.size();
         first += static_cast<std::size_t>(cfg.batch_size), ++batch_id) {
      const std::size_t count =
          std::min(order.size() - first, static_cast<std::size_t>(cfg.batch_size));
      const std::span<const Index> batch_starts(order.data() + first, count);
      const RowMatrix start_states = rows_at(states, batch_starts);
      Vector grad;
      const double loss = model.window_loss(
          {episode.inputs, episode.outputs, batch_starts, start_states, cfg.window}, &grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        throw NumericalError("non-finite training loss in epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_id));
      }
      params = adam_step(adam, params, grad);
      model.set_params(params);
      loss_sum += loss * static_cast<double>(count);
    }
    report.train_mse.push_back(loss_sum / static_cast<double>(order.size()));

    states = rollout_states(model, episode, cfg.window_start);
    const double val = loss_over(model, episode, states, select_starts, cfg.window);
    report.val_mse.push_back(val);
    if (!std::isfinite(val)) {
      throw NumericalError("non-finite validation loss after epoch " + std::to_string(epoch));
    }
    if (val < report.best_val_mse) {
      report.best_val_mse = val;
      report.best_epoch = epoch;
      best_params = params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      report.stopped_early = true;
      break;
    }
  }

  model.set_params(best_params);
  report.params = best_params;
  states = rollout_states(model, episode, cfg.window_start);
  report.test_mse = loss_over(model, episode, states, windows.test_starts, cfg.window);
  return report;
}

}  // namespace gkf
