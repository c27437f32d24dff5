#include "attribnet/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "attribnet/kernels.hpp"
#include "attribnet/rng.hpp"

namespace attribnet {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

void Matrix::validate() const {
  if (entries.size() != rows * cols)
    throw std::invalid_argument("matrix entry count does not match shape");
  for (double v : entries)
    if (!std::isfinite(v))
      throw std::invalid_argument("matrix contains a non-finite entry");
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (v.size() != m.cols)
    throw std::invalid_argument("matvec: vector dim " + std::to_string(v.size()) +
                                " != matrix cols " + std::to_string(m.cols));
  const auto& k = kernels::active();
  Vector out(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    out[r] = k.dot(m.row(r), v.data(), m.cols);
  return out;
}

Vector apply_transposed(const Matrix& m, const Vector& v) {
  if (v.size() != m.rows)
    throw std::invalid_argument("apply_transposed: vector dim " +
                                std::to_string(v.size()) + " != matrix rows " +
                                std::to_string(m.rows));
  const auto& k = kernels::active();
  Vector out(m.cols, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r)
    k.axpy(out.data(), v[r], m.row(r), m.cols);
  return out;
}

Matrix transposed(const Matrix& m) {
  Matrix t(m.cols, m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) t.at(c, r) = m.at(r, c);
  return t;
}

double l2_norm(const Vector& v) {
  return std::sqrt(kernels::active().sum_sq(v.data(), v.size()));
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: dimension mismatch");
  return kernels::active().dot(a.data(), b.data(), a.size());
}

Vector add(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("add: dimension mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector sub(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("sub: dimension mismatch");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

void scale_in_place(Vector& v, double c) {
  kernels::active().scale(v.data(), c, v.size());
}

namespace {

// Fixed start vector: all ones plus small index-keyed offsets. The offsets
// break exact orthogonality against integer-structured dominant spaces
// (e.g. eigenvectors like (1,-1) or (1,-2,1)) while staying deterministic.
Vector power_start(std::size_t dim) {
  Vector v(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    std::uint64_t s = static_cast<std::uint64_t>(i) + 1;
    const double offset =
        static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;  // [0,1)
    v[i] = 1.0 + 0.0625 * (offset - 0.5);
  }
  return v;
}

}  // namespace

SingularValueResult top_singular_value(const Matrix& m, double tol,
                                       std::size_t max_iters) {
  if (m.rows == 0 || m.cols == 0)
    throw std::invalid_argument("top_singular_value: empty matrix");
  if (!(tol > 0.0)) throw std::invalid_argument("top_singular_value: tol must be > 0");

  // Iterate on the smaller Gram matrix: G = M M^T if rows <= cols, else M^T M.
  const bool use_left = m.rows <= m.cols;
  const std::size_t dim = use_left ? m.rows : m.cols;

  auto apply_gram = [&](const Vector& v) {
    if (use_left) return matvec(m, apply_transposed(m, v));
    return apply_transposed(m, matvec(m, v));
  };

  Vector v = power_start(dim);
  double inv = 1.0 / l2_norm(v);
  scale_in_place(v, inv);

  SingularValueResult res;
  double rayleigh_prev = -1.0;
  for (std::size_t iter = 1; iter <= max_iters; ++iter) {
    Vector u = apply_gram(v);
    const double rayleigh = dot(v, u);  // >= 0 for a Gram matrix
    res.value = std::sqrt(rayleigh > 0.0 ? rayleigh : 0.0);
    res.iterations = iter;

    const double norm_u = l2_norm(u);
    if (norm_u == 0.0) {
      // v lies in the null space. For a zero matrix that is the answer;
      // otherwise restart once from a basis-like deterministic vector.
      if (kernels::active().sum_sq(m.entries.data(), m.entries.size()) == 0.0) {
        res.value = 0.0;
        res.converged = true;
        return res;
      }
      v.assign(dim, 0.0);
      v[iter % dim] = 1.0;
      rayleigh_prev = -1.0;
      continue;
    }

    if (rayleigh_prev >= 0.0 &&
        std::abs(rayleigh - rayleigh_prev) <= tol * std::abs(rayleigh)) {
      res.converged = true;
      return res;
    }
    rayleigh_prev = rayleigh;
    scale_in_place(u, 1.0 / norm_u);
    v = std::move(u);
  }
  return res;  // not converged; carries the last iterate's estimate
}

}  // namespace attribnet
