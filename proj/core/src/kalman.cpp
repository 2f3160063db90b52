#include "gkf/kalman.hpp"

#include <string>

#include "gkf/errors.hpp"

namespace gkf {
namespace {

void check_belief(const Belief& b) {
  require_square(b.cov, "belief covariance");
  if (b.cov.rows() != b.mean.size()) {
    throw DimensionError("belief mean/covariance dimensions disagree");
  }
}

void check_shape(const Matrix& m, Index rows, Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(name) + " is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

}  // namespace

LinearSystem LinearSystem::constant(SystemMatrices m) {
  return LinearSystem([m = std::move(m)](Index) { return m; });
}

SystemMatrices LinearSystem::at(Index t) const { return provider_(t); }

Matrix kalman_gain(const Matrix& p_prior, const Matrix& H, const Matrix& R) {
  const Matrix hp = H * p_prior;
  const Matrix s = hp * H.transpose() + R;
  // S K^T = H P^T; P and S are symmetric.
  return spd_solve(s, hp).transpose();
}

Matrix joseph_update(const Matrix& p_prior, const Matrix& K, const Matrix& H, const Matrix& R) {
  const Index n = p_prior.rows();
  const Matrix a = Matrix::Identity(n, n) - K * H;
  return symmetrized(a * p_prior * a.transpose() + K * R * K.transpose());
}

Belief kf_predict(const Belief& belief, const LinearSystem& sys, const Vector& x, Index t) {
  check_belief(belief);
  const SystemMatrices m = sys.at(t);
  const Index dh = belief.mean.size();
  check_shape(m.F, dh, dh, "F");
  check_shape(m.G, dh, x.size(), "G");
  check_shape(m.Q, dh, dh, "Q");
  return {m.F * belief.mean + m.G * x,
          symmetrized(m.F * belief.cov * m.F.transpose() + m.Q)};
}

UpdateResult kf_update(const Belief& belief, const LinearSystem& sys, const Vector& y, Index t) {
  check_belief(belief);
  const SystemMatrices m = sys.at(t);
  const Index dh = belief.mean.size();
  check_shape(m.H, y.size(), dh, "H");
  check_shape(m.R, y.size(), y.size(), "R");
  const Matrix K = kalman_gain(belief.cov, m.H, m.R);
  const Vector innovation = y - m.H * belief.mean;
  return {{belief.mean + K * innovation, joseph_update(belief.cov, K, m.H, m.R)}, K, innovation};
}

EkfResult ekf_step(const Belief& belief, const DiffFn& f_st, const DiffFn& f_ro, const Vector& x,
                   const Vector& y, const Matrix& Q, const Matrix& R) {
  check_belief(belief);
  const Index dh = belief.mean.size();
  check_shape(Q, dh, dh, "Q");
  check_shape(R, y.size(), y.size(), "R");

  const std::vector<Vector> st_in{belief.mean, x};
  const Matrix F = f_st.jacobian(0, st_in);
  const Vector h_prior = f_st(st_in);
  const Matrix p_prior = symmetrized(F * belief.cov * F.transpose() + Q);

  const std::vector<Vector> ro_in{h_prior};
  const Vector y_pred = f_ro(ro_in);
  const Matrix H = f_ro.jacobian(0, ro_in);
  if (!h_prior.allFinite() || !y_pred.allFinite()) {
    throw NumericalError("ekf_step: non-finite model output");
  }

  const Matrix K = kalman_gain(p_prior, H, R);
  return {{h_prior + K * (y - y_pred), joseph_update(p_prior, K, H, R)}, y_pred};
}

}  // namespace gkf
