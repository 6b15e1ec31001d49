#pragma once

#include <cstddef>
#include <vector>

#include "exmap/rng.hpp"

namespace exmap {

// Dense row-major matrix of 64-bit reals.
struct RealMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  RealMatrix() = default;
  RealMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const RealMatrix& o) const { return rows == o.rows && cols == o.cols; }

  static RealMatrix identity(int n);
  static RealMatrix column(const std::vector<double>& v);
};

// a (r x k) times b (k x c); throws std::invalid_argument on shape mismatch.
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);

// a^T * b and a * b^T, used by reverse-mode sweeps.
RealMatrix matmul_tn(const RealMatrix& a, const RealMatrix& b);
RealMatrix matmul_nt(const RealMatrix& a, const RealMatrix& b);

// Entries uniform on +/- sqrt(6 / (rows + cols)), seeded.
RealMatrix glorot_init(int rows, int cols, Rng& rng);

// Symmetric-pattern CSR matrix with fixed values; the aggregation operator
// of the graph convolution and the carrier of the normalized adjacency.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int n, std::vector<int> row_ptr, std::vector<int> col,
               std::vector<double> val)
      : n_(n), row_ptr_(std::move(row_ptr)), col_(std::move(col)), val_(std::move(val)) {}

  int size() const { return n_; }
  std::size_t nonzeros() const { return col_.size(); }

  // S * x, x dense (n x c).
  RealMatrix multiply(const RealMatrix& x) const;
  // S^T * x. Row pattern is stored explicitly, no symmetry assumed.
  RealMatrix multiply_transpose(const RealMatrix& x) const;

  RealMatrix dense() const;

  double entry(int i, int j) const;

 private:
  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_;
  std::vector<double> val_;
};

// Solves the symmetric system a * x = rhs by Gaussian elimination with
// partial pivoting. Columns whose pivot falls below `tol` are dropped
// (coefficient forced to zero), which handles collinear regression designs.
// Returns false only if every pivot is degenerate.
bool solve_linear(RealMatrix a, std::vector<double> rhs, std::vector<double>& x,
                  double tol = 1e-12);

}  // namespace exmap
