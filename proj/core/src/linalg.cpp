#include "gkf/linalg.hpp"

#include <string>

#include "gkf/errors.hpp"

namespace gkf {

Tensor3::Tensor3(Index n, Index p, Index q, double fill)
    : dims_{n, p, q}, data_(static_cast<std::size_t>(n * p * q), fill) {
  if (n < 0 || p < 0 || q < 0) {
    throw DimensionError("Tensor3: negative dimension");
  }
}

Vector bullet(const Tensor3& b, const Matrix& c) {
  if (c.rows() != b.dim1() || c.cols() != b.dim2()) {
    throw DimensionError("bullet: C is " + std::to_string(c.rows()) + "x" +
                         std::to_string(c.cols()) + ", tensor expects " +
                         std::to_string(b.dim1()) + "x" + std::to_string(b.dim2()));
  }
  Vector out = Vector::Zero(b.dim0());
  for (Index v = 0; v < b.dim0(); ++v) {
    double acc = 0.0;
    for (Index i = 0; i < b.dim1(); ++i) {
      for (Index j = 0; j < b.dim2(); ++j) {
        acc += b(v, i, j) * c(i, j);
      }
    }
    out[v] = acc;
  }
  return out;
}

Matrix symmetrized(const Matrix& m) {
  require_square(m, "symmetrized");
  return 0.5 * (m + m.transpose());
}

Matrix spd_solve(const Matrix& s, const Matrix& b) {
  require_square(s, "spd_solve");
  if (b.rows() != s.rows()) {
    throw DimensionError("spd_solve: right-hand side has " + std::to_string(b.rows()) +
                         " rows, expected " + std::to_string(s.rows()));
  }
  const Matrix sym = symmetrized(s);
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success || !all_finite(llt.matrixLLT())) {
    Eigen::LDLT<Matrix> ldlt(sym);
    const double pivot = sym.size() == 0 ? 0.0 : ldlt.vectorD().minCoeff();
    throw SingularInnovationError(
        "innovation covariance is not positive definite (min pivot " +
            std::to_string(pivot) + ")",
        pivot);
  }
  return llt.solve(b);
}

Vector vec_row_major(const Matrix& m) {
  Vector out(m.size());
  Index k = 0;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      out[k++] = m(i, j);
    }
  }
  return out;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

double asymmetry(const Matrix& m) {
  require_square(m, "asymmetry");
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix& symmetric) {
  require_square(symmetric, "min_eigenvalue");
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

}  // namespace gkf
