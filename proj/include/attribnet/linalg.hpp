#pragma once

// Minimal dense real linear algebra: row-major matrices, vectors, products,
// norms, and the dominant singular value. Layers in scope are small, so
// there are no sparse or blocked formats.

#include <cstddef>
#include <vector>

namespace attribnet {

using Vector = std::vector<double>;

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;  // row-major, rows*cols, finite values only

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), entries(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return entries[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
  double* row(std::size_t r) { return entries.data() + r * cols; }
  const double* row(std::size_t r) const { return entries.data() + r * cols; }

  bool operator==(const Matrix& other) const = default;

  static Matrix identity(std::size_t n);
  // Throws std::invalid_argument when an entry is NaN/Inf or the shape does
  // not match the entry count.
  void validate() const;
};

// M v; v.size() == M.cols, result size M.rows.
Vector matvec(const Matrix& m, const Vector& v);

// M^T v; v.size() == M.rows, result size M.cols.
Vector apply_transposed(const Matrix& m, const Vector& v);

Matrix transposed(const Matrix& m);

double l2_norm(const Vector& v);
double dot(const Vector& a, const Vector& b);
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
void scale_in_place(Vector& v, double c);

struct SingularValueResult {
  double value = 0.0;   // best sigma_max estimate (last iterate if not converged)
  bool converged = false;
  std::size_t iterations = 0;
};

// Dominant singular value by power iteration on M M^T (or M^T M when that
// Gram matrix is smaller). Deterministic: the start vector is all-ones with
// small fixed index-keyed offsets, which keeps it clear of the dominant
// space's orthogonal complement even for symmetric integer matrices.
// Convergence criterion: relative change of the Rayleigh quotient < tol.
SingularValueResult top_singular_value(const Matrix& m, double tol = 1e-10,
                                       std::size_t max_iters = 10000);

}  // namespace attribnet
