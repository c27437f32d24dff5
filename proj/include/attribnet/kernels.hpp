#pragma once

// Data-parallel inner loops used by the linear algebra, attribution and
// augmentation code. Every kernel has a scalar reference implementation and
// may have SIMD variants; the active set is chosen once at startup from CPU
// capabilities and can be overridden for testing (set_backend or the
// ATTRIBNET_KERNELS environment variable, values "scalar" or "avx2").
//
// All kernels operate on doubles. SIMD variants must agree with the scalar
// reference exactly for elementwise maps and within accumulation-order
// rounding for reductions; tests/test_kernels.cpp enforces this.

#include <cstddef>
#include <string>

namespace attribnet {
namespace kernels {

struct Ops {
  // sum_i a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i a[i]
  double (*sum)(const double* a, std::size_t n);
  // sum_i a[i]^2
  double (*sum_sq)(const double* a, std::size_t n);
  // y[i] += c * x[i]
  void (*axpy)(double* y, double c, const double* x, std::size_t n);
  // x[i] *= c
  void (*scale)(double* x, double c, std::size_t n);
  // dst[i] = a[i] * b[i]
  void (*mul)(double* dst, const double* a, const double* b, std::size_t n);
  // dst[i] = max(src[i], 0)
  void (*relu)(double* dst, const double* src, std::size_t n);
  // x[i] = min(max(x[i], 0), 1)
  void (*clamp01)(double* x, std::size_t n);
  // pos = sum_i (w[i]*z[i])_+ , neg = sum_i (w[i]*z[i])_-   (neg <= 0)
  void (*pos_neg_masses)(const double* w, const double* z, std::size_t n,
                         double* pos, double* neg);
  // dst[i] = cpos*(w[i]*z[i])_+ + cneg*(w[i]*z[i])_-
  void (*combine_pos_neg)(double* dst, const double* w, const double* z,
                          double cpos, double cneg, std::size_t n);
};

enum class Backend { scalar, avx2 };

// Active kernel table. Resolved on first use and stable for the lifetime of
// the process unless set_backend is called.
const Ops& active();
Backend active_backend();
std::string backend_name(Backend b);

// Overrides the active table. Requesting an unsupported backend falls back
// to scalar and returns false.
bool set_backend(Backend b);
bool backend_supported(Backend b);

// Reference table, always available (used by equivalence tests).
const Ops& scalar_ops();
// SIMD table, or nullptr when unsupported on this CPU.
const Ops* avx2_ops();

}  // namespace kernels
}  // namespace attribnet
