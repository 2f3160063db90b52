#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gkf/linalg.hpp"

namespace gkf {

// A differentiable vector function of one or more vector inputs. Parameters
// are bound inside the callbacks; the optional parameter VJP returns
// d<cotangent, f(inputs)>/d(params).
class DiffFn {
 public:
  using Inputs = std::span<const Vector>;
  using EvalFn = std::function<Vector(Inputs)>;
  using JacobianFn = std::function<Matrix(Inputs, std::size_t slot)>;
  using ParamVjpFn = std::function<Vector(Inputs, const Vector& cotangent)>;

  DiffFn(std::vector<Index> input_dims, Index output_dim, EvalFn eval, JacobianFn jacobian,
         Index n_params = 0, ParamVjpFn param_vjp = {});

  std::size_t n_inputs() const { return input_dims_.size(); }
  Index input_dim(std::size_t slot) const { return input_dims_.at(slot); }
  Index output_dim() const { return output_dim_; }
  Index n_params() const { return n_params_; }
  bool has_param_vjp() const { return static_cast<bool>(param_vjp_); }

  Vector operator()(Inputs inputs) const;
  // d f / d inputs[slot], shape (output_dim, input_dim(slot)).
  Matrix jacobian(std::size_t slot, Inputs inputs) const;
  Vector param_vjp(Inputs inputs, const Vector& cotangent) const;

  // f(x) = a x + b, single slot.
  static DiffFn affine(Matrix a, Vector b);

 private:
  void check_inputs(Inputs inputs) const;

  std::vector<Index> input_dims_;
  Index output_dim_;
  EvalFn eval_;
  JacobianFn jacobian_;
  Index n_params_;
  ParamVjpFn param_vjp_;
};

// Central-difference Jacobian w.r.t. inputs[slot], step 1e-5 * max(1, |x_i|).
// Test oracle for the analytic Jacobians; throws NumericalError on non-finite probes.
Matrix fd_jacobian(const DiffFn& f, std::size_t slot, DiffFn::Inputs point);

// Central-difference gradient of a scalar function of a parameter vector.
Vector fd_gradient(const std::function<double(const Vector&)>& loss, const Vector& at);

// Largest |a - b| / max(1, |b|) over all entries.
double max_relative_error(const Matrix& a, const Matrix& b);

struct AdamState {
  explicit AdamState(Index n_params, double lr = 0.01, double beta1 = 0.9, double beta2 = 0.999,
                     double eps = 1e-8);

  std::int64_t step = 0;
  Vector first_moment;
  Vector second_moment;
  double lr;
  double beta1;
  double beta2;
  double eps;
};

// One bias-corrected Adam update; returns the new parameter vector.
Vector adam_step(AdamState& state, const Vector& params, const Vector& grad);

}  // namespace gkf
