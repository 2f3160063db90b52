#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "gkf/kalman.hpp"
#include "gkf/models.hpp"

namespace gkf {

// Covariance over a noise space, stored either as variance * I or dense.
class NoiseCovariance {
 public:
  static NoiseCovariance isotropic(double variance);
  static NoiseCovariance dense(Matrix cov);

  bool is_isotropic() const { return !dense_.has_value(); }
  double variance() const { return variance_; }
  // J C J^T without materializing C when isotropic.
  Matrix sandwich(const Matrix& j) const;
  Matrix materialize(Index dim) const;

 private:
  double variance_ = 0.0;
  std::optional<Matrix> dense_;
};

struct GkfConfig {
  NoiseCovariance state_noise;    // Q, over the model's noise space
  NoiseCovariance readout_noise;  // R, over the output space
  Belief prior;

  // Q = sigma_eta^2 I, R = sigma_nu^2 I, prior (0, sigma_eta^2 I).
  static GkfConfig standard(const GssModel& model, double sigma_eta, double sigma_nu);
};

// One filter step. Without refinement only the a priori fields are set.
struct GkfRecord {
  Vector s_prior;
  Vector y_prior;
  Vector s_post;
  Vector y_post;
  double trace_prior = 0.0;
  double trace_post = 0.0;
  double gain_norm = 0.0;
  // Present when the run keeps full matrices.
  std::optional<Matrix> F, L, H, M, P_prior, K, P_post;
};

struct GkfStepResult {
  Belief belief;
  GkfRecord record;
};

enum class TraceDetail { kSummary, kFull };

struct GkfTrace {
  bool refined = false;
  std::vector<GkfRecord> steps;
};

// Encode, predict, linearize, propagate covariance, gain, correct.
GkfStepResult gkf_step(const GssModel& model, const GkfConfig& cfg, const Belief& belief,
                       const Vector& x, const Vector& y, TraceDetail detail = TraceDetail::kFull);

// Step k consumes inputs.row(k) (the input preceding the target) and
// outputs.row(k). With refine = false only the a priori prediction runs and
// s^- is fed forward in place of s^+.
GkfTrace gkf_run(const GssModel& model, const GkfConfig& cfg, const Matrix& inputs,
                 const Matrix& outputs, bool refine, TraceDetail detail = TraceDetail::kSummary);

// CSV columns: t,mse_prior,mse_post,trace_p_prior,trace_p_post,gain_fro.
void write_trace_csv(std::ostream& out, const GkfTrace& trace, const Matrix& outputs,
                     Index t_offset = 0);

}  // namespace gkf
