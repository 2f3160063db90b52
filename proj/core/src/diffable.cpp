#include "gkf/diffable.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gkf/errors.hpp"

namespace gkf {

DiffFn::DiffFn(std::vector<Index> input_dims, Index output_dim, EvalFn eval, JacobianFn jacobian,
               Index n_params, ParamVjpFn param_vjp)
    : input_dims_(std::move(input_dims)),
      output_dim_(output_dim),
      eval_(std::move(eval)),
      jacobian_(std::move(jacobian)),
      n_params_(n_params),
      param_vjp_(std::move(param_vjp)) {}

void DiffFn::check_inputs(Inputs inputs) const {
  if (inputs.size() != input_dims_.size()) {
    throw DimensionError("DiffFn: expected " + std::to_string(input_dims_.size()) +
                         " inputs, got " + std::to_string(inputs.size()));
  }
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k].size() != input_dims_[k]) {
      throw DimensionError("DiffFn: input " + std::to_string(k) + " has length " +
                           std::to_string(inputs[k].size()) + ", expected " +
                           std::to_string(input_dims_[k]));
    }
  }
}

Vector DiffFn::operator()(Inputs inputs) const {
  check_inputs(inputs);
  return eval_(inputs);
}

Matrix DiffFn::jacobian(std::size_t slot, Inputs inputs) const {
  check_inputs(inputs);
  if (slot >= input_dims_.size()) throw DimensionError("DiffFn: jacobian slot out of range");
  return jacobian_(inputs, slot);
}

Vector DiffFn::param_vjp(Inputs inputs, const Vector& cotangent) const {
  check_inputs(inputs);
  if (!param_vjp_) throw Error("DiffFn: no parameter gradient available");
  if (cotangent.size() != output_dim_) throw DimensionError("DiffFn: cotangent length mismatch");
  return param_vjp_(inputs, cotangent);
}

DiffFn DiffFn::affine(Matrix a, Vector b) {
  const Index in = a.cols();
  const Index out = a.rows();
  if (b.size() != out) throw DimensionError("DiffFn::affine: offset length mismatch");
  return DiffFn(
      {in}, out, [a, b](Inputs x) -> Vector { return a * x[0] + b; },
      [a](Inputs, std::size_t) -> Matrix { return a; });
}

Matrix fd_jacobian(const DiffFn& f, std::size_t slot, DiffFn::Inputs point) {
  std::vector<Vector> probe(point.begin(), point.end());
  const Index n = f.input_dim(slot);
  Matrix jac(f.output_dim(), n);
  for (Index i = 0; i < n; ++i) {
    const double x0 = probe[slot][i];
    const double h = 1e-5 * std::max(1.0, std::abs(x0));
    probe[slot][i] = x0 + h;
    const Vector up = f(probe);
    probe[slot][i] = x0 - h;
    const Vector down = f(probe);
    probe[slot][i] = x0;
    if (!up.allFinite() || !down.allFinite()) {
      throw NumericalError("fd_jacobian: non-finite output while probing input " +
                           std::to_string(i));
    }
    jac.col(i) = (up - down) / (2.0 * h);
  }
  return jac;
}

Vector fd_gradient(const std::function<double(const Vector&)>& loss, const Vector& at) {
  Vector probe = at;
  Vector grad(at.size());
  for (Index i = 0; i < at.size(); ++i) {
    const double x0 = probe[i];
    const double h = 1e-5 * std::max(1.0, std::abs(x0));
    probe[i] = x0 + h;
    const double up = loss(probe);
    probe[i] = x0 - h;
    const double down = loss(probe);
    probe[i] = x0;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("fd_gradient: non-finite loss while probing parameter " +
                           std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double max_relative_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_relative_error: shape mismatch");
  }
  double worst = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::max(1.0, std::abs(b(i, j))));
    }
  }
  return worst;
}

AdamState::AdamState(Index n_params, double lr_, double beta1_, double beta2_, double eps_)
    : first_moment(Vector::Zero(n_params)),
      second_moment(Vector::Zero(n_params)),
      lr(lr_),
      beta1(beta1_),
      beta2(beta2_),
      eps(eps_) {}

Vector adam_step(AdamState& state, const Vector& params, const Vector& grad) {
  if (grad.size() != params.size() || params.size() != state.first_moment.size()) {
    throw DimensionError("adam_step: gradient/parameter/state lengths disagree");
  }
  if (!grad.allFinite()) throw NumericalError("adam_step: non-finite gradient");
  ++state.step;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad;
  state.second_moment =
      state.beta2 * state.second_moment + (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const Vector m_hat = state.first_moment / bc1;
  const Vector v_hat = state.second_moment / bc2;
  return params - state.lr * (m_hat.array() / (v_hat.array().sqrt() + state.eps)).matrix();
}

}  // namespace gkf
