#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "gkf/diffable.hpp"
#include "gkf/graph.hpp"
#include "gkf/linalg.hpp"

namespace gkf {

enum class Nonlinearity { kIdentity, kTanh };

double activate(Nonlinearity rho, double z);
double activate_derivative(Nonlinearity rho, double z);
std::string_view to_string(Nonlinearity rho);
Nonlinearity parse_nonlinearity(std::string_view tag);

// How the state noise enters the transition: added to the node signal, or
// added to the adjacency (A_theta + alpha) before message passing.
enum class NoiseMode { kAdditiveSignal, kAdjacency };

struct ParamLayout {
  Index encoder = 0;
  Index transition = 0;
  Index readout = 0;

  Index total() const { return encoder + transition + readout; }
};

// A set of training windows over one episode. Window b predicts the targets
// outputs.row(starts[b] + k), k < length, starting from start_states.row(b)
// as the state estimate at time starts[b]; inputs.row(t) drives t -> t + 1.
struct WindowBatch {
  const Matrix& inputs;
  const Matrix& outputs;
  std::span<const Index> starts;
  const RowMatrix& start_states;
  Index length;
};

// The (encoder, transition, readout) triple of a graph state-space model with
// the Jacobians the graph filter needs. States are flattened node-major.
class GssModel {
 public:
  virtual ~GssModel() = default;

  virtual std::string family() const = 0;
  virtual std::unique_ptr<GssModel> clone() const = 0;

  const GraphTopology& topology() const { return topology_; }
  Index n_nodes() const { return topology_.n_nodes(); }

  virtual Index input_features() const = 0;
  virtual Index state_features() const = 0;
  virtual Index output_features() const = 0;
  virtual NoiseMode noise_mode() const { return NoiseMode::kAdditiveSignal; }

  Index input_dim() const { return n_nodes() * input_features(); }
  Index state_dim() const { return n_nodes() * state_features(); }
  Index output_dim() const { return n_nodes() * output_features(); }
  Index noise_dim() const;

  virtual Vector encode(const Vector& x) const = 0;
  // Noise-free transition f(s, x_enc, 0).
  virtual Vector transition(const Vector& s, const Vector& x_enc) const = 0;
  // Noise-free readout f(s, 0).
  virtual Vector readout(const Vector& s) const = 0;

  // f with an explicit noise sample; additive mode adds it to the output,
  // adjacency mode reads it as vec(alpha), row-major.
  virtual Vector transition_with_noise(const Vector& s, const Vector& x_enc,
                                       const Vector& noise) const;
  // Readout noise is additive for every model in this toolkit.
  virtual Vector readout_with_noise(const Vector& s, const Vector& nu) const;

  // F = d f / d s at (s, x_enc, 0).
  virtual Matrix transition_jacobian(const Vector& s, const Vector& x_enc) const = 0;
  // d f / d x_enc. The models here all transform s + x_enc, so the default
  // reuses F.
  virtual Matrix encoded_input_jacobian(const Vector& s, const Vector& x_enc) const {
    return transition_jacobian(s, x_enc);
  }
  // L = d f / d noise at (s, x_enc, 0), shape (state_dim, noise_dim).
  virtual Matrix noise_jacobian(const Vector& s, const Vector& x_enc) const;
  // H = d f_psi / d s at (s, 0).
  virtual Matrix readout_jacobian(const Vector& s) const = 0;
  // M = d f_psi / d nu at (s, 0).
  virtual Matrix readout_noise_jacobian(const Vector& s) const;

  virtual ParamLayout param_layout() const = 0;
  virtual Vector params() const = 0;
  virtual void set_params(const Vector& params) = 0;

  // Gradients of <cotangent, f(...)> w.r.t. the flat parameter vector.
  virtual Vector transition_param_vjp(const Vector& s, const Vector& x_enc,
                                      const Vector& cotangent) const = 0;
  virtual Vector readout_param_vjp(const Vector& s, const Vector& cotangent) const = 0;

  // Mean over windows, steps and output scalars of (y^- - y)^2, unrolled
  // without noise. Fills d loss / d params when grad is non-null; start
  // states are treated as constants.
  virtual double window_loss(const WindowBatch& batch, Vector* grad) const = 0;

 protected:
  explicit GssModel(GraphTopology topology) : topology_(std::move(topology)) {}

  void check_state(const Vector& s) const;
  void check_encoded(const Vector& x_enc) const;

  GraphTopology topology_;
};

// Noise-free rollout: row 0 is `initial`, row t + 1 = f(row t, encode(inputs.row(t))).
RowMatrix free_run(const GssModel& model, const Matrix& inputs, const Vector& initial);

// DiffFn views of a model (the model is cloned). Transition slots: (s, x_enc).
DiffFn transition_fn(const GssModel& model);
DiffFn readout_fn(const GssModel& model);
// Slot 0 is the noise sample, evaluated at fixed (s, x_enc).
DiffFn transition_noise_fn(const GssModel& model, const Vector& s, const Vector& x_enc);
// Slot 0 is nu, evaluated at fixed s.
DiffFn readout_noise_fn(const GssModel& model, const Vector& s);

// d f / d alpha as a (state_dim, |V|, |V|) tensor. Additive-signal models
// with scalar node states return the diagonal embedding delta_{v,i} delta_{i,j}.
Tensor3 alpha_jacobian(const GssModel& model, const Vector& s, const Vector& x_enc);

}  // namespace gkf
