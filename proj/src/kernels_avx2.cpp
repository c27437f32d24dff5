// AVX2 variants of the kernel table. Each function carries its own target
// attribute so the rest of the translation unit stays baseline; dispatch in
// kernels_dispatch.cpp only installs this table after a cpuid check.
//
// Elementwise kernels reproduce the scalar reference expression exactly
// (no FMA contraction); reductions use vector accumulators and are allowed
// to differ from the reference by accumulation-order rounding.

#include "attribnet/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define ATTRIBNET_HAVE_AVX2_KERNELS 1
#include <immintrin.h>
#endif

namespace attribnet {
namespace kernels {

#if ATTRIBNET_HAVE_AVX2_KERNELS

namespace {

__attribute__((target("avx2,fma"))) inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

__attribute__((target("avx2,fma")))
double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

__attribute__((target("avx2,fma")))
double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

__attribute__((target("avx2,fma")))
double sum_sq_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

__attribute__((target("avx2")))
void axpy_avx2(double* y, double c, const double* x, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(vc, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += c * x[i];
}

__attribute__((target("avx2")))
void scale_avx2(double* x, double c, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vc));
  for (; i < n; ++i) x[i] *= c;
}

__attribute__((target("avx2")))
void mul_avx2(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i,
                     _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) dst[i] = a[i] * b[i];
}

__attribute__((target("avx2")))
void relu_avx2(double* dst, const double* src, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  // max(v, 0) with 0 as second operand: returns +0 for -0 and NaN inputs,
  // same as the scalar reference's (v > 0 ? v : 0).
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_max_pd(_mm256_loadu_pd(src + i), zero));
  for (; i < n; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
}

__attribute__((target("avx2")))
void clamp01_avx2(double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_max_pd(_mm256_loadu_pd(x + i), zero);
    _mm256_storeu_pd(x + i, _mm256_min_pd(v, one));
  }
  for (; i < n; ++i) {
    double v = x[i];
    v = v > 0.0 ? v : 0.0;
    v = v < 1.0 ? v : 1.0;
    x[i] = v;
  }
}

__attribute__((target("avx2")))
void pos_neg_masses_avx2(const double* w, const double* z, std::size_t n,
                         double* pos, double* neg) {
  const __m256d zero = _mm256_setzero_pd();
  __m256d accp = _mm256_setzero_pd();
  __m256d accn = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d y = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(z + i));
    accp = _mm256_add_pd(accp, _mm256_max_pd(y, zero));
    accn = _mm256_add_pd(accn, _mm256_min_pd(y, zero));
  }
  double p = hsum(accp);
  double q = hsum(accn);
  for (; i < n; ++i) {
    const double y = w[i] * z[i];
    p += y > 0.0 ? y : 0.0;
    q += y < 0.0 ? y : 0.0;
  }
  *pos = p;
  *neg = q;
}

__attribute__((target("avx2")))
void combine_pos_neg_avx2(double* dst, const double* w, const double* z,
                          double cpos, double cneg, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d vp = _mm256_set1_pd(cpos);
  const __m256d vn = _mm256_set1_pd(cneg);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d y = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(z + i));
    __m256d yp = _mm256_mul_pd(vp, _mm256_max_pd(y, zero));
    __m256d ym = _mm256_mul_pd(vn, _mm256_min_pd(y, zero));
    _mm256_storeu_pd(dst + i, _mm256_add_pd(yp, ym));
  }
  for (; i < n; ++i) {
    const double y = w[i] * z[i];
    const double yp = y > 0.0 ? y : 0.0;
    const double ym = y < 0.0 ? y : 0.0;
    dst[i] = cpos * yp + cneg * ym;
  }
}

const Ops avx2_table = {
    dot_avx2,     sum_avx2,     sum_sq_avx2,
    axpy_avx2,    scale_avx2,   mul_avx2,
    relu_avx2,    clamp01_avx2, pos_neg_masses_avx2,
    combine_pos_neg_avx2,
};

}  // namespace

const Ops* avx2_ops() {
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return &avx2_table;
  return nullptr;
}

#else

const Ops* avx2_ops() { return nullptr; }

#endif  // ATTRIBNET_HAVE_AVX2_KERNELS

}  // namespace kernels
}  // namespace attribnet
