#include "exmap/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace exmap {

RealMatrix RealMatrix::identity(int n) {
  RealMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

RealMatrix RealMatrix::column(const std::vector<double>& v) {
  RealMatrix m(static_cast<int>(v.size()), 1);
  m.data = v;
  return m;
}

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
  if (a.cols != b.rows)
    throw std::invalid_argument("matmul: inner dimensions disagree (" +
                                std::to_string(a.cols) + " vs " + std::to_string(b.rows) + ")");
  RealMatrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[static_cast<std::size_t>(i) * a.cols];
    double* orow = &out.data[static_cast<std::size_t>(i) * b.cols];
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = &b.data[static_cast<std::size_t>(k) * b.cols];
      for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

RealMatrix matmul_tn(const RealMatrix& a, const RealMatrix& b) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: row counts disagree");
  RealMatrix out(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k) {
    const double* arow = &a.data[static_cast<std::size_t>(k) * a.cols];
    const double* brow = &b.data[static_cast<std::size_t>(k) * b.cols];
    for (int i = 0; i < a.cols; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* orow = &out.data[static_cast<std::size_t>(i) * b.cols];
      for (int j = 0; j < b.cols; ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

RealMatrix matmul_nt(const RealMatrix& a, const RealMatrix& b) {
  if (a.cols != b.cols) throw std::invalid_argument("matmul_nt: column counts disagree");
  RealMatrix out(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[static_cast<std::size_t>(i) * a.cols];
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = &b.data[static_cast<std::size_t>(j) * b.cols];
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
      out(i, j) = s;
    }
  }
  return out;
}

RealMatrix glorot_init(int rows, int cols, Rng& rng) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("glorot_init: dimensions must be >= 1");
  const double bound = std::sqrt(6.0 / (rows + cols));
  RealMatrix m(rows, cols);
  for (double& v : m.data) v = (2.0 * uniform01(rng) - 1.0) * bound;
  return m;
}

RealMatrix SparseMatrix::multiply(const RealMatrix& x) const {
  if (x.rows != n_) throw std::invalid_argument("SparseMatrix::multiply: shape mismatch");
  RealMatrix out(n_, x.cols);
  for (int i = 0; i < n_; ++i) {
    double* orow = &out.data[static_cast<std::size_t>(i) * x.cols];
    for (int idx = row_ptr_[i]; idx < row_ptr_[i + 1]; ++idx) {
      const double v = val_[idx];
      const double* xrow = &x.data[static_cast<std::size_t>(col_[idx]) * x.cols];
      for (int j = 0; j < x.cols; ++j) orow[j] += v * xrow[j];
    }
  }
  return out;
}

RealMatrix SparseMatrix::multiply_transpose(const RealMatrix& x) const {
  if (x.rows != n_) throw std::invalid_argument("SparseMatrix::multiply_transpose: shape mismatch");
  RealMatrix out(n_, x.cols);
  for (int i = 0; i < n_; ++i) {
    const double* xrow = &x.data[static_cast<std::size_t>(i) * x.cols];
    for (int idx = row_ptr_[i]; idx < row_ptr_[i + 1]; ++idx) {
      const double v = val_[idx];
      double* orow = &out.data[static_cast<std::size_t>(col_[idx]) * x.cols];
      for (int j = 0; j < x.cols; ++j) orow[j] += v * xrow[j];
    }
  }
  return out;
}

RealMatrix SparseMatrix::dense() const {
  RealMatrix out(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int idx = row_ptr_[i]; idx < row_ptr_[i + 1]; ++idx) out(i, col_[idx]) = val_[idx];
  return out;
}

double SparseMatrix::entry(int i, int j) const {
  for (int idx = row_ptr_[i]; idx < row_ptr_[i + 1]; ++idx)
    if (col_[idx] == j) return val_[idx];
  return 0.0;
}

bool solve_linear(RealMatrix a, std::vector<double> rhs, std::vector<double>& x, double tol) {
  const int n = a.rows;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::vector<bool> dropped(n, false);

  for (int k = 0; k < n; ++k) {
    int piv = -1;
    double best = tol;
    for (int i = k; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) { best = v; piv = i; }
    }
    if (piv < 0) { dropped[k] = true; continue; }
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(rhs[k], rhs[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      rhs[i] -= f * rhs[k];
    }
  }

  x.assign(n, 0.0);
  bool any = false;
  for (int k = n - 1; k >= 0; --k) {
    if (dropped[k]) continue;
    double s = rhs[k];
    for (int j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
    any = true;
  }
  return any;
}

}  // namespace exmap
