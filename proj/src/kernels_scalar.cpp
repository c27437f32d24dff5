#include "attribnet/kernels.hpp"

namespace attribnet {
namespace kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double sum_sq_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

void axpy_scalar(double* y, double c, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += c * x[i];
}

void scale_scalar(double* x, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= c;
}

void mul_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void relu_scalar(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
}

void clamp01_scalar(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i];
    v = v > 0.0 ? v : 0.0;
    v = v < 1.0 ? v : 1.0;
    x[i] = v;
  }
}

void pos_neg_masses_scalar(const double* w, const double* z, std::size_t n,
                           double* pos, double* neg) {
  double p = 0.0, q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = w[i] * z[i];
    p += y > 0.0 ? y : 0.0;
    q += y < 0.0 ? y : 0.0;
  }
  *pos = p;
  *neg = q;
}

void combine_pos_neg_scalar(double* dst, const double* w, const double* z,
                            double cpos, double cneg, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double y = w[i] * z[i];
    const double yp = y > 0.0 ? y : 0.0;
    const double ym = y < 0.0 ? y : 0.0;
    dst[i] = cpos * yp + cneg * ym;
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops = {
      dot_scalar,     sum_scalar,           sum_sq_scalar,
      axpy_scalar,    scale_scalar,         mul_scalar,
      relu_scalar,    clamp01_scalar,       pos_neg_masses_scalar,
      combine_pos_neg_scalar,
  };
  return ops;
}

}  // namespace kernels
}  // namespace attribnet
