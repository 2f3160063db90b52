#include "gkf/models.hpp"

#include <cmath>
#include <string>

#include "gkf/errors.hpp"

namespace gkf {

double activate(Nonlinearity rho, double z) {
  return rho == Nonlinearity::kTanh ? std::tanh(z) : z;
}

double activate_derivative(Nonlinearity rho, double z) {
  if (rho == Nonlinearity::kTanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  return 1.0;
}

std::string_view to_string(Nonlinearity rho) {
  return rho == Nonlinearity::kTanh ? "tanh" : "id";
}

Nonlinearity parse_nonlinearity(std::string_view tag) {
  if (tag == "id" || tag == "identity") return Nonlinearity::kIdentity;
  if (tag == "tanh") return Nonlinearity::kTanh;
  throw DataError("unknown nonlinearity '" + std::string(tag) + "' (expected id or tanh)");
}

Index GssModel::noise_dim() const {
  return noise_mode() == NoiseMode::kAdjacency ? n_nodes() * n_nodes() : state_dim();
}

void GssModel::check_state(const Vector& s) const {
  if (s.size() != state_dim()) {
    throw DimensionError(family() + ": state has length " + std::to_string(s.size()) +
                         ", expected " + std::to_string(state_dim()));
  }
}

void GssModel::check_encoded(const Vector& x_enc) const {
  if (x_enc.size() != state_dim()) {
    throw DimensionError(family() + ": encoded input has length " + std::to_string(x_enc.size()) +
                         ", expected " + std::to_string(state_dim()));
  }
}

Vector GssModel::transition_with_noise(const Vector& s, const Vector& x_enc,
                                       const Vector& noise) const {
  if (noise_mode() != NoiseMode::kAdditiveSignal) {
    throw Error(family() + ": transition_with_noise not implemented for adjacency noise");
  }
  if (noise.size() != state_dim()) throw DimensionError("state noise length mismatch");
  return transition(s, x_enc) + noise;
}

Vector GssModel::readout_with_noise(const Vector& s, const Vector& nu) const {
  if (nu.size() != output_dim()) throw DimensionError("readout noise length mismatch");
  return readout(s) + nu;
}

Matrix GssModel::noise_jacobian(const Vector& s, const Vector& x_enc) const {
  if (noise_mode() != NoiseMode::kAdditiveSignal) {
    throw Error(family() + ": noise_jacobian not implemented for adjacency noise");
  }
  check_state(s);
  check_encoded(x_enc);
  return Matrix::Identity(state_dim(), state_dim());
}

Matrix GssModel::readout_noise_jacobian(const Vector& s) const {
  check_state(s);
  return Matrix::Identity(output_dim(), output_dim());
}

RowMatrix free_run(const GssModel& model, const Matrix& inputs, const Vector& initial) {
  if (inputs.cols() != model.input_dim()) {
    throw DimensionError("free_run: inputs have " + std::to_string(inputs.cols()) +
                         " columns, expected " + std::to_string(model.input_dim()));
  }
  const Index steps = inputs.rows();
  RowMatrix states(steps + 1, model.state_dim());
  Vector s = initial;
  states.row(0) = s.transpose();
  for (Index t = 0; t < steps; ++t) {
    s = model.transition(s, model.encode(inputs.row(t).transpose()));
    states.row(t + 1) = s.transpose();
  }
  return states;
}

DiffFn transition_fn(const GssModel& model) {
  std::shared_ptr<const GssModel> m = model.clone();
  const Index n = m->state_dim();
  return DiffFn(
      {n, n}, n, [m](DiffFn::Inputs in) -> Vector { return m->transition(in[0], in[1]); },
      [m](DiffFn::Inputs in, std::size_t slot) -> Matrix {
        return slot == 0 ? m->transition_jacobian(in[0], in[1])
                         : m->encoded_input_jacobian(in[0], in[1]);
      },
      m->param_layout().total(),
      [m](DiffFn::Inputs in, const Vector& cot) -> Vector {
        return m->transition_param_vjp(in[0], in[1], cot);
      });
}

DiffFn readout_fn(const GssModel& model) {
  std::shared_ptr<const GssModel> m = model.clone();
  return DiffFn(
      {m->state_dim()}, m->output_dim(),
      [m](DiffFn::Inputs in) -> Vector { return m->readout(in[0]); },
      [m](DiffFn::Inputs in, std::size_t) -> Matrix { return m->readout_jacobian(in[0]); },
      m->param_layout().total(),
      [m](DiffFn::Inputs in, const Vector& cot) -> Vector {
        return m->readout_param_vjp(in[0], cot);
      });
}

DiffFn transition_noise_fn(const GssModel& model, const Vector& s, const Vector& x_enc) {
  std::shared_ptr<const GssModel> m = model.clone();
  return DiffFn(
      {m->noise_dim()}, m->state_dim(),
      [m, s, x_enc](DiffFn::Inputs in) -> Vector { return m->transition_with_noise(s, x_enc, in[0]); },
      [m, s, x_enc](DiffFn::Inputs, std::size_t) -> Matrix { return m->noise_jacobian(s, x_enc); });
}

DiffFn readout_noise_fn(const GssModel& model, const Vector& s) {
  std::shared_ptr<const GssModel> m = model.clone();
  return DiffFn(
      {m->output_dim()}, m->output_dim(),
      [m, s](DiffFn::Inputs in) -> Vector { return m->readout_with_noise(s, in[0]); },
      [m, s](DiffFn::Inputs, std::size_t) -> Matrix { return m->readout_noise_jacobian(s); });
}

Tensor3 alpha_jacobian(const GssModel& model, const Vector& s, const Vector& x_enc) {
  const Index n = model.n_nodes();
  const Index ns = model.state_dim();
  if (model.noise_mode() == NoiseMode::kAdjacency) {
    const Matrix l = model.noise_jacobian(s, x_enc);
    Tensor3 out(ns, n, n);
    for (Index v = 0; v < ns; ++v) {
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) out(v, i, j) = l(v, i * n + j);
      }
    }
    return out;
  }
  if (model.state_features() != 1) {
    throw Error(model.family() +
                ": additive-signal noise has no adjacency embedding for multi-feature states");
  }
  Tensor3 out(ns, n, n);
  for (Index v = 0; v < n; ++v) out(v, v, v) = 1.0;
  return out;
}

}  // namespace gkf
