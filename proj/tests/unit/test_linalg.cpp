#include <gtest/gtest.h>

#include "gkf/errors.hpp"
#include "gkf/linalg.hpp"
#include "support.hpp"

namespace gkf {
namespace {

TEST(Bullet, IdentityAndSwapSlices) {
  Tensor3 b(2, 2, 2);
  b(0, 0, 0) = 1.0;
  b(0, 1, 1) = 1.0;
  b(1, 0, 1) = 1.0;
  b(1, 1, 0) = 1.0;
  Matrix c(2, 2);
  c << 1, 2, 3, 4;
  const Vector out = bullet(b, c);
  EXPECT_DOUBLE_EQ(out(0), 5.0);
  EXPECT_DOUBLE_EQ(out(1), 5.0);
}

TEST(Bullet, ZeroMatrixGivesZero) {
  Rng rng(3, StreamId::kTest);
  Tensor3 b(4, 3, 3);
  for (double& v : b.data()) v = rng.normal();
  EXPECT_EQ(bullet(b, Matrix::Zero(3, 3)), Vector::Zero(4));
}

TEST(Bullet, AllOnes) {
  Tensor3 b(1, 2, 2, 1.0);
  EXPECT_DOUBLE_EQ(bullet(b, Matrix::Ones(2, 2))(0), 4.0);
}

TEST(Bullet, MatchesUnfoldedProduct) {
  Rng rng(5, StreamId::kTest);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(8));
    const Index p = 1 + static_cast<Index>(rng.below(6));
    const Index q = 1 + static_cast<Index>(rng.below(6));
    Tensor3 b(n, p, q);
    for (double& v : b.data()) v = rng.normal();
    const Matrix c = testing::random_matrix(rng, p, q);
    // Explicit reshape: row v of the (n, p*q) matrix times the row-major vec of C.
    Vector expected = Vector::Zero(n);
    for (Index v = 0; v < n; ++v) {
      for (Index k = 0; k < p * q; ++k) expected(v) += b.data()[v * p * q + k] * c(k / q, k % q);
    }
    EXPECT_LE((bullet(b, c) - expected).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((b.unfolded() * vec_row_major(c) - expected).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Bullet, DimensionMismatchThrows) {
  Tensor3 b(2, 2, 2);
  EXPECT_THROW(bullet(b, Matrix::Zero(3, 2)), DimensionError);
}

TEST(SpdSolve, ScaledIdentity) {
  const Matrix x = spd_solve(2.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  EXPECT_TRUE(x.isApprox(0.5 * Matrix::Identity(2, 2), 1e-15));
}

TEST(SpdSolve, HandSolvedTwoByTwo) {
  Matrix s(2, 2);
  s << 4, 1, 1, 3;
  Matrix b(2, 1);
  b << 1, 0;
  const Matrix x = spd_solve(s, b);
  EXPECT_NEAR(x(0, 0), 3.0 / 11.0, 1e-15);
  EXPECT_NEAR(x(1, 0), -1.0 / 11.0, 1e-15);
}

TEST(SpdSolve, IndefiniteThrows) {
  Matrix s(2, 2);
  s << 1, 2, 2, 1;
  EXPECT_THROW(spd_solve(s, Matrix::Identity(2, 2)), SingularInnovationError);
  try {
    spd_solve(s, Matrix::Identity(2, 2));
  } catch (const SingularInnovationError& e) {
    EXPECT_LE(e.min_pivot(), 0.0);
  }
}

TEST(SpdSolve, RecoversRandomSolutions) {
  Rng rng(11, StreamId::kTest);
  for (Index n : {1, 2, 5, 17, 40, 100}) {
    const Matrix s = testing::random_spd(rng, n);
    const Matrix x = testing::random_matrix(rng, n, 3);
    const Matrix solved = spd_solve(s, s * x);
    EXPECT_LE((solved - x).norm() / x.norm(), 1e-10) << "n=" << n;
  }
}

TEST(SpdSolve, NonSquareThrows) {
  EXPECT_THROW(spd_solve(Matrix::Identity(2, 3), Matrix::Identity(2, 2)), DimensionError);
}

TEST(Helpers, SymmetrizedAndAsymmetry) {
  Matrix m(2, 2);
  m << 1, 2, 4, 3;
  EXPECT_DOUBLE_EQ(asymmetry(m), 2.0);
  EXPECT_DOUBLE_EQ(asymmetry(symmetrized(m)), 0.0);
  EXPECT_DOUBLE_EQ(symmetrized(m)(0, 1), 3.0);
}

TEST(Helpers, VecRowMajorAndFinite) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  Vector expected(4);
  expected << 1, 2, 3, 4;
  EXPECT_EQ(vec_row_major(m), expected);
  EXPECT_TRUE(all_finite(m));
  m(1, 0) = std::nan("");
  EXPECT_FALSE(all_finite(m));
}

TEST(Helpers, MinEigenvalue) {
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  EXPECT_NEAR(min_eigenvalue(m), 1.0, 1e-14);
}

}  // namespace
}  // namespace gkf
