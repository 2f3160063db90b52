#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace gkf {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense three-index array stored row-major: element (v, i, j) lives at
// data[(v * p + i) * q + j].
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(Index n, Index p, Index q, double fill = 0.0);

  Index dim0() const { return dims_[0]; }
  Index dim1() const { return dims_[1]; }
  Index dim2() const { return dims_[2]; }
  std::array<Index, 3> dims() const { return dims_; }

  double& operator()(Index v, Index i, Index j) { return data_[offset(v, i, j)]; }
  double operator()(Index v, Index i, Index j) const { return data_[offset(v, i, j)]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  // (n, p*q) view; row v holds slice B_v flattened row-major.
  Eigen::Map<const RowMatrix> unfolded() const {
    return {data_.data(), dims_[0], dims_[1] * dims_[2]};
  }

 private:
  std::size_t offset(Index v, Index i, Index j) const {
    return static_cast<std::size_t>((v * dims_[1] + i) * dims_[2] + j);
  }

  std::array<Index, 3> dims_{0, 0, 0};
  std::vector<double> data_;
};

// [B . C]_v = sum_{i,j} B(v,i,j) C(i,j)
Vector bullet(const Tensor3& b, const Matrix& c);

// Solves S X = B for symmetric positive definite S (symmetrized first).
// Throws SingularInnovationError when the Cholesky factorization fails.
Matrix spd_solve(const Matrix& s, const Matrix& b);

Matrix symmetrized(const Matrix& m);

// Row-major flattening of a matrix, the layout used for vec(alpha).
Vector vec_row_major(const Matrix& m);

bool all_finite(const Matrix& m);

// max |m - m^T|
double asymmetry(const Matrix& m);

double min_eigenvalue(const Matrix& symmetric);

void require_square(const Matrix& m, const char* what);

}  // namespace gkf
