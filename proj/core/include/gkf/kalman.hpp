#pragma once

#include <functional>

#include "gkf/diffable.hpp"
#include "gkf/linalg.hpp"

namespace gkf {

struct Belief {
  Vector mean;
  Matrix cov;
};

// System matrices in effect at one time index: F, G, Q drive the transition
// into step t, H, R the observation at step t.
struct SystemMatrices {
  Matrix F;
  Matrix G;
  Matrix H;
  Matrix Q;
  Matrix R;
};

// Time-variant linear system; constant systems ignore the time index.
class LinearSystem {
 public:
  using Provider = std::function<SystemMatrices(Index t)>;

  explicit LinearSystem(Provider provider) : provider_(std::move(provider)) {}
  static LinearSystem constant(SystemMatrices m);

  SystemMatrices at(Index t) const;

 private:
  Provider provider_;
};

struct UpdateResult {
  Belief belief;
  Matrix gain;
  Vector innovation;
};

struct EkfResult {
  Belief belief;
  Vector y_pred;
};

Belief kf_predict(const Belief& belief, const LinearSystem& sys, const Vector& x, Index t);
UpdateResult kf_update(const Belief& belief, const LinearSystem& sys, const Vector& y, Index t);

// Linearizes f_st (slots: state, input) at the previous posterior mean and
// f_ro (slot: state) at the prior mean, then runs the linear predict/update.
EkfResult ekf_step(const Belief& belief, const DiffFn& f_st, const DiffFn& f_ro, const Vector& x,
                   const Vector& y, const Matrix& Q, const Matrix& R);

// Shared covariance algebra, also used by the graph filter.
// K = P H^T S^{-1} with S = H P H^T + R, solved by Cholesky.
Matrix kalman_gain(const Matrix& p_prior, const Matrix& H, const Matrix& R);
// Joseph form (I - K H) P (I - K H)^T + K R K^T, symmetrized.
Matrix joseph_update(const Matrix& p_prior, const Matrix& K, const Matrix& H, const Matrix& R);

}  // namespace gkf
