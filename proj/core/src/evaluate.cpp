#include "gkf/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "gkf/errors.hpp"
#include "gkf/kalman.hpp"

namespace gkf {
namespace {

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

struct StepErrors {
  Vector prior;
  Vector post;
};

void fill_rpi(Evaluation& ev, const StepErrors& e, Index block) {
  const RpiStats stats = rpi_by_blocks(e.prior, e.post, block);
  ev.rpi_batches = stats.values;
  ev.row.rpi_mean = stats.mean;
  ev.row.rpi_std = stats.std;
  ev.row.n_batches = static_cast<Index>(stats.values.size());
}

void evaluate_filter(const GssModel& model, const Episode& episode, const GkfConfig& cfg,
                     const EvalOptions& options, Evaluation& ev) {
  const Index len = ev.t_end - ev.run_begin;
  const Index skip = ev.t_begin - ev.run_begin;
  const Index scored = ev.t_end - ev.t_begin;
  const Matrix inputs = episode.inputs.middleRows(ev.run_begin - 1, len);
  const Matrix outputs = episode.outputs.middleRows(ev.run_begin, len);
  const double denom = static_cast<double>(scored * model.output_dim());

  if (options.kfr != KfrMode::kOn) {
    GkfTrace open = gkf_run(model, cfg, inputs, outputs, false);
    double acc = 0.0;
    for (Index k = skip; k < len; ++k) {
      acc += (open.steps[static_cast<std::size_t>(k)].y_prior - outputs.row(k).transpose())
                 .squaredNorm();
    }
    ev.row.mse_prior = acc / denom;
    ev.trace = std::move(open);
  }
  if (options.kfr != KfrMode::kOff) {
    GkfTrace refined = gkf_run(model, cfg, inputs, outputs, true);
    StepErrors e{Vector(scored), Vector(scored)};
    for (Index k = skip; k < len; ++k) {
      const GkfRecord& rec = refined.steps[static_cast<std::size_t>(k)];
      const Vector y = outputs.row(k).transpose();
      e.prior(k - skip) = (rec.y_prior - y).squaredNorm();
      e.post(k - skip) = (rec.y_post - y).squaredNorm();
    }
    ev.row.mse_post = e.prior.sum() / denom;
    fill_rpi(ev, e, options.batch_size);
    ev.trace = std::move(refined);
  }
}

void evaluate_oracle(const GssModel& model, const Episode& episode, const GkfConfig& cfg,
                     const EvalOptions& options, Evaluation& ev) {
  if (episode.states.rows() != episode.steps() || episode.states.size() == 0) {
    throw DataError("oracle evaluation needs the recorded states (states.csv)");
  }
  if (episode.states.cols() != model.state_dim()) {
    throw DataError("recorded states have " + std::to_string(episode.states.cols()) +
                    " columns but the model state dimension is " +
                    std::to_string(model.state_dim()));
  }
  const Index scored = ev.t_end - ev.t_begin;
  StepErrors e{Vector(scored), Vector(scored)};
  ev.trace.refined = options.kfr != KfrMode::kOff;
  for (Index t = ev.t_begin; t < ev.t_end; ++t) {
    const Vector s_prev = episode.states.row(t - 1).transpose();
    const Vector x_enc = model.encode(episode.inputs.row(t - 1).transpose());
    const Vector y = episode.outputs.row(t).transpose();
    GkfRecord rec;
    // Both oracles refine with the one-step uncertainty L Q L^T.
    const Matrix p_prior = cfg.state_noise.sandwich(model.noise_jacobian(s_prev, x_enc));
    if (options.oracle == Oracle::kExp) {
      rec.s_prior = model.transition(s_prev, x_enc);
    } else {
      rec.s_prior = episode.states.row(t).transpose();
    }
    rec.y_prior = model.readout(rec.s_prior);
    e.prior(t - ev.t_begin) = (rec.y_prior - y).squaredNorm();
    if (ev.trace.refined) {
      const Matrix H = model.readout_jacobian(rec.s_prior);
      const Matrix r_eff = cfg.readout_noise.sandwich(model.readout_noise_jacobian(rec.s_prior));
      const Matrix K = kalman_gain(p_prior, H, r_eff);
      rec.s_post = rec.s_prior + K * (y - rec.y_prior);
      rec.y_post = model.readout(rec.s_post);
      rec.trace_prior = p_prior.trace();
      rec.trace_post = joseph_update(p_prior, K, H, r_eff).trace();
      rec.gain_norm = K.norm();
      e.post(t - ev.t_begin) = (rec.y_post - y).squaredNorm();
    }
    ev.trace.steps.push_back(std::move(rec));
  }
  const double mse = e.prior.sum() / static_cast<double>(scored * model.output_dim());
  // The oracle's a priori estimate does not depend on the refinement.
  if (options.kfr != KfrMode::kOn) ev.row.mse_prior = mse;
  if (options.kfr != KfrMode::kOff) {
    ev.row.mse_post = mse;
    fill_rpi(ev, e, options.batch_size);
  }
}

}  // namespace

KfrMode parse_kfr_mode(std::string_view tag) {
  if (tag == "off") return KfrMode::kOff;
  if (tag == "on") return KfrMode::kOn;
  if (tag == "both") return KfrMode::kBoth;
  throw DataError("unknown KFR mode '" + std::string(tag) + "' (expected on, off or both)");
}

Oracle parse_oracle(std::string_view tag) {
  if (tag == "none") return Oracle::kNone;
  if (tag == "exp") return Oracle::kExp;
  if (tag == "gt") return Oracle::kGt;
  throw DataError("unknown oracle '" + std::string(tag) + "' (expected exp or gt)");
}

std::string_view to_string(KfrMode mode) {
  switch (mode) {
    case KfrMode::kOff: return "off";
    case KfrMode::kOn: return "on";
    case KfrMode::kBoth: return "both";
  }
  return "both";
}

std::string_view to_string(Oracle oracle) {
  switch (oracle) {
    case Oracle::kNone: return "none";
    case Oracle::kExp: return "exp";
    case Oracle::kGt: return "gt";
  }
  return "none";
}

RpiStats rpi_by_blocks(const Vector& err_prior, const Vector& err_post, Index block) {
  if (err_prior.size() != err_post.size()) throw DimensionError("rpi: length mismatch");
  if (block < 1) throw DataError("rpi: block size must be positive");
  RpiStats out;
  for (Index first = 0; first < err_prior.size(); first += block) {
    const Index n = std::min(block, err_prior.size() - first);
    const double prior = err_prior.segment(first, n).sum();
    const double post = err_post.segment(first, n).sum();
    if (prior > 0.0) out.values.push_back((post - prior) / prior);
  }
  out.mean = mean_of(out.values);
  if (!out.values.empty()) out.std = sample_std(out.values, out.mean);
  return out;
}

Evaluation evaluate(const GssModel& model, const Episode& episode, const EvalOptions& options,
                    const std::string& model_tag) {
  const auto started = std::chrono::steady_clock::now();
  if (episode.inputs.cols() != model.input_dim() || episode.outputs.cols() != model.output_dim()) {
    throw DataError("episode has " + std::to_string(episode.outputs.cols()) +
                    " nodes but the model expects " + std::to_string(model.n_nodes()));
  }
  if (options.warmup < 0) throw DataError("warmup must be non-negative");
  if (options.batch_size < 1) throw DataError("batch size must be positive");

  TrainConfig split_cfg;
  split_cfg.split = options.split;
  split_cfg.window = 1;
  const WindowSet windows = make_windows(episode.steps(), split_cfg);

  Evaluation ev;
  ev.row.model = model_tag;
  ev.row.dataset = episode.config.name;
  ev.t_begin = std::max<Index>(windows.test.begin, 1);
  ev.t_end = windows.test.end;
  if (ev.t_end <= ev.t_begin) throw DataError("test segment is empty");
  ev.run_begin = std::max<Index>(1, ev.t_begin - options.warmup);

  const double sigma_eta =
      std::isnan(options.sigma_eta) ? episode.config.sigma_eta : options.sigma_eta;
  const double sigma_nu = std::isnan(options.sigma_nu) ? episode.config.sigma_nu : options.sigma_nu;
  const GkfConfig cfg = GkfConfig::standard(model, sigma_eta, sigma_nu);

  if (options.oracle == Oracle::kNone) {
    evaluate_filter(model, episode, cfg, options, ev);
    ev.trace_begin = ev.run_begin;
  } else {
    evaluate_oracle(model, episode, cfg, options, ev);
    ev.trace_begin = ev.t_begin;
  }
  ev.row.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return ev;
}

ReportRow aggregate(const std::vector<Evaluation>& runs) {
  if (runs.empty()) throw DataError("nothing to aggregate");
  ReportRow row = runs.front().row;
  std::vector<double> prior, post, rpi;
  double runtime = 0.0;
  for (const Evaluation& ev : runs) {
    prior.push_back(ev.row.mse_prior);
    post.push_back(ev.row.mse_post);
    rpi.insert(rpi.end(), ev.rpi_batches.begin(), ev.rpi_batches.end());
    runtime += ev.row.runtime_s;
  }
  row.mse_prior = mean_of(prior);
  row.mse_prior_std = sample_std(prior, row.mse_prior);
  row.mse_post = mean_of(post);
  row.mse_post_std = sample_std(post, row.mse_post);
  row.rpi_mean = mean_of(rpi);
  row.rpi_std = rpi.empty() ? std::numeric_limits<double>::quiet_NaN() : sample_std(rpi, row.rpi_mean);
  row.n_batches = static_cast<Index>(rpi.size());
  row.n_runs = static_cast<Index>(runs.size());
  row.runtime_s = runtime;
  return row;
}

}  // namespace gkf
