#include "gkf/graph_kf.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "gkf/errors.hpp"
#include "gkf/format.hpp"

namespace gkf {

NoiseCovariance NoiseCovariance::isotropic(double variance) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw DataError("noise variance must be finite and non-negative");
  }
  NoiseCovariance c;
  c.variance_ = variance;
  return c;
}

NoiseCovariance NoiseCovariance::dense(Matrix cov) {
  require_square(cov, "noise covariance");
  if (asymmetry(cov) > 1e-12) throw DataError("noise covariance is not symmetric");
  NoiseCovariance c;
  c.dense_ = std::move(cov);
  return c;
}

Matrix NoiseCovariance::sandwich(const Matrix& j) const {
  if (dense_) {
    if (dense_->rows() != j.cols()) throw DimensionError("noise covariance dimension mismatch");
    return j * (*dense_) * j.transpose();
  }
  return variance_ * (j * j.transpose());
}

Matrix NoiseCovariance::materialize(Index dim) const {
  if (dense_) {
    if (dense_->rows() != dim) throw DimensionError("noise covariance dimension mismatch");
    return *dense_;
  }
  return variance_ * Matrix::Identity(dim, dim);
}

GkfConfig GkfConfig::standard(const GssModel& model, double sigma_eta, double sigma_nu) {
  const double q = sigma_eta * sigma_eta;
  const Index n = model.state_dim();
  return {NoiseCovariance::isotropic(q), NoiseCovariance::isotropic(sigma_nu * sigma_nu),
          {Vector::Zero(n), q * Matrix::Identity(n, n)}};
}

namespace {

void check_config(const GssModel& model, const GkfConfig& cfg, const Belief& belief) {
  if (belief.mean.size() != model.state_dim() || belief.cov.rows() != model.state_dim() ||
      belief.cov.cols() != model.state_dim()) {
    throw DimensionError("gkf: belief does not match the model state dimension " +
                         std::to_string(model.state_dim()));
  }
  if (!cfg.state_noise.is_isotropic() && model.noise_mode() == NoiseMode::kAdjacency &&
      model.n_nodes() > 8) {
    throw DataError("gkf: dense adjacency-noise covariance is limited to graphs of <= 8 nodes");
  }
}

}  // namespace

GkfStepResult gkf_step(const GssModel& model, const GkfConfig& cfg, const Belief& belief,
                       const Vector& x, const Vector& y, TraceDetail detail) {
  check_config(model, cfg, belief);
  if (y.size() != model.output_dim()) {
    throw DimensionError("gkf: output has length " + std::to_string(y.size()) + ", expected " +
                         std::to_string(model.output_dim()));
  }
  const Vector x_enc = model.encode(x);
  const Vector& s_prev = belief.mean;

  GkfRecord rec;
  rec.s_prior = model.transition(s_prev, x_enc);
  rec.y_prior = model.readout(rec.s_prior);
  if (!rec.s_prior.allFinite() || !rec.y_prior.allFinite()) {
    throw NumericalError("gkf: non-finite model output");
  }

  const Matrix F = model.transition_jacobian(s_prev, x_enc);
  const Matrix L = model.noise_jacobian(s_prev, x_enc);
  const Matrix H = model.readout_jacobian(rec.s_prior);
  const Matrix M = model.readout_noise_jacobian(rec.s_prior);

  const Matrix p_prior = symmetrized(F * belief.cov * F.transpose() + cfg.state_noise.sandwich(L));
  const Matrix r_eff = cfg.readout_noise.sandwich(M);
  const Matrix K = kalman_gain(p_prior, H, r_eff);

  rec.s_post = rec.s_prior + K * (y - rec.y_prior);
  Matrix p_post = joseph_update(p_prior, K, H, r_eff);
  rec.y_post = model.readout(rec.s_post);
  if (!rec.s_post.allFinite() || !p_post.allFinite()) {
    throw NumericalError("gkf: non-finite a posteriori estimate");
  }
  rec.trace_prior = p_prior.trace();
  rec.trace_post = p_post.trace();
  rec.gain_norm = K.norm();
  if (detail == TraceDetail::kFull) {
    rec.F = F;
    rec.L = L;
    rec.H = H;
    rec.M = M;
    rec.P_prior = p_prior;
    rec.K = K;
    rec.P_post = p_post;
  }
  Belief next{rec.s_post, std::move(p_post)};
  return {std::move(next), std::move(rec)};
}

GkfTrace gkf_run(const GssModel& model, const GkfConfig& cfg, const Matrix& inputs,
                 const Matrix& outputs, bool refine, TraceDetail detail) {
  if (inputs.rows() != outputs.rows()) {
    throw DimensionError("gkf_run: inputs and outputs have different lengths");
  }
  if (inputs.rows() < 1) throw DimensionError("gkf_run: empty episode");
  if (inputs.cols() != model.input_dim() || outputs.cols() != model.output_dim()) {
    throw DimensionError("gkf_run: episode feature dimensions do not match the model");
  }
  GkfTrace trace;
  trace.refined = refine;
  trace.steps.reserve(static_cast<std::size_t>(inputs.rows()));
  Belief belief = cfg.prior;
  for (Index k = 0; k < inputs.rows(); ++k) {
    const Vector x = inputs.row(k).transpose();
    if (refine) {
      GkfStepResult step = gkf_step(model, cfg, belief, x, outputs.row(k).transpose(), detail);
      belief = std::move(step.belief);
      trace.steps.push_back(std::move(step.record));
    } else {
      GkfRecord rec;
      rec.s_prior = model.transition(belief.mean, model.encode(x));
      rec.y_prior = model.readout(rec.s_prior);
      if (!rec.s_prior.allFinite() || !rec.y_prior.allFinite()) {
        throw NumericalError("gkf: non-finite model output at step " + std::to_string(k));
      }
      belief.mean = rec.s_prior;
      trace.steps.push_back(std::move(rec));
    }
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const GkfTrace& trace, const Matrix& outputs,
                     Index t_offset) {
  out << kCsvVersionLine << "t,mse_prior,mse_post,trace_p_prior,trace_p_post,gain_fro\n";
  char buf[256];
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const GkfRecord& r = trace.steps[k];
    const Vector y = outputs.row(static_cast<Index>(k)).transpose();
    const double n = static_cast<double>(y.size());
    const double mse_prior = (r.y_prior - y).squaredNorm() / n;
    if (trace.refined) {
      const double mse_post = (r.y_post - y).squaredNorm() / n;
      std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    static_cast<long long>(t_offset + static_cast<Index>(k)), mse_prior, mse_post,
                    r.trace_prior, r.trace_post, r.gain_norm);
    } else {
      std::snprintf(buf, sizeof buf, "%lld,%.17g,,,,\n",
                    static_cast<long long>(t_offset + static_cast<Index>(k)), mse_prior);
    }
    out << buf;
  }
}

}  // namespace gkf
