#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gkf/diffable.hpp"
#include "gkf/errors.hpp"
#include "gkf/graph.hpp"
#include "support.hpp"

namespace gkf {
namespace {

DiffFn tanh_fn(Index n) {
  return DiffFn(
      {n}, n, [](DiffFn::Inputs in) -> Vector { return in[0].array().tanh().matrix(); },
      [](DiffFn::Inputs in, std::size_t) -> Matrix {
        return (1.0 - in[0].array().tanh().square()).matrix().asDiagonal();
      });
}

TEST(FdJacobian, IdentityMap) {
  Rng rng(1, StreamId::kTest);
  const DiffFn f = DiffFn::affine(Matrix::Identity(4, 4), Vector::Zero(4));
  const Vector x = testing::random_vector(rng, 4, 3.0);
  const Vector inputs[] = {x};
  EXPECT_LE(max_relative_error(fd_jacobian(f, 0, inputs), Matrix::Identity(4, 4)), 1e-9);
}

TEST(FdJacobian, LinearGraphMap) {
  const GraphTopology g = testing::path_graph(2);
  const Matrix a = 0.6 * Matrix::Identity(2, 2) + 0.3 * g.normalized_sym();
  const DiffFn f = DiffFn::affine(a, Vector::Zero(2));
  Vector s(2);
  s << 0.7, -1.3;
  const Vector inputs[] = {s};
  Matrix expected(2, 2);
  expected << 0.75, 0.15, 0.15, 0.75;
  EXPECT_LE(max_relative_error(fd_jacobian(f, 0, inputs), expected), 1e-9);
  EXPECT_LE(max_relative_error(f.jacobian(0, inputs), expected), 1e-15);
}

TEST(FdJacobian, TanhAtZero) {
  const DiffFn f = tanh_fn(3);
  const Vector x = Vector::Zero(3);
  const Vector inputs[] = {x};
  EXPECT_LE(max_relative_error(fd_jacobian(f, 0, inputs), Matrix::Identity(3, 3)), 1e-9);
}

TEST(FdJacobian, MatchesAnalyticTanh) {
  Rng rng(2, StreamId::kTest);
  const DiffFn f = tanh_fn(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = testing::random_vector(rng, 5, 2.0);
    const Vector inputs[] = {x};
    EXPECT_LE(max_relative_error(f.jacobian(0, inputs), fd_jacobian(f, 0, inputs)), 1e-8);
  }
}

TEST(FdJacobian, NonFiniteProbeThrows) {
  const DiffFn f(
      {1}, 1, [](DiffFn::Inputs in) -> Vector { return in[0].array().log().matrix(); },
      [](DiffFn::Inputs in, std::size_t) -> Matrix { return in[0].cwiseInverse().asDiagonal(); });
  const Vector x = Vector::Constant(1, -1.0);
  const Vector inputs[] = {x};
  EXPECT_THROW(fd_jacobian(f, 0, inputs), NumericalError);
}

TEST(DiffFn, RejectsWrongInputDims) {
  const DiffFn f = DiffFn::affine(Matrix::Identity(2, 2), Vector::Zero(2));
  const Vector x = Vector::Zero(3);
  const Vector inputs[] = {x};
  EXPECT_THROW(f(inputs), DimensionError);
}

TEST(FdGradient, Quadratic) {
  Vector at(3);
  at << 1.0, -2.0, 0.5;
  const Vector g = fd_gradient([](const Vector& p) { return p.squaredNorm(); }, at);
  EXPECT_LE(max_relative_error(g, 2.0 * at), 1e-8);
}

TEST(Adam, ZeroGradientKeepsParams) {
  AdamState state(3);
  Vector p(3);
  p << 1.0, 2.0, 3.0;
  EXPECT_EQ(adam_step(state, p, Vector::Zero(3)), p);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  AdamState state(1, 0.01);
  const Vector p = Vector::Constant(1, 0.3);
  const Vector next = adam_step(state, p, Vector::Constant(1, 1.0));
  EXPECT_NEAR(next(0) - p(0), -0.01, 1e-9);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, IdenticalParamsStayIdentical) {
  AdamState state(2);
  Vector p = Vector::Constant(2, 0.5);
  Rng rng(4, StreamId::kTest);
  for (int i = 0; i < 50; ++i) {
    p = adam_step(state, p, Vector::Constant(2, rng.normal()));
    ASSERT_EQ(p(0), p(1));
  }
}

TEST(Adam, NonFiniteGradientThrows) {
  AdamState state(1);
  EXPECT_THROW(adam_step(state, Vector::Zero(1),
                         Vector::Constant(1, std::numeric_limits<double>::quiet_NaN())),
               NumericalError);
}

TEST(Adam, LengthMismatchThrows) {
  AdamState state(2);
  EXPECT_THROW(adam_step(state, Vector::Zero(2), Vector::Zero(3)), DimensionError);
}

}  // namespace
}  // namespace gkf
