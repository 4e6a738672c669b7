// AVX2 kernel variants. Compiled with -mavx2 in its own translation unit;
// dispatch.cpp only installs this table after a runtime CPUID check.
//
// Elementwise kernels reproduce the scalar operation order exactly (mul,
// mul, add — no FMA) so scalar and AVX2 outputs are bit-identical. The
// sum_sq_diff reduction keeps four lane accumulators and therefore differs
// from the sequential reference within ~1 ulp; callers treat it as such.

#include "polarsep/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace polarsep::kernels {
namespace avx2 {

void weighted_sum2(const double* a, const double* b, const double* wa,
                   const double* wb, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    const __m256d vwa = _mm256_loadu_pd(wa + i);
    const __m256d vwb = _mm256_loadu_pd(wb + i);
    const __m256d v =
        _mm256_add_pd(_mm256_mul_pd(va, vwa), _mm256_mul_pd(vb, vwb));
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) {
    out[i] = (a[i] * wa[i]) + (b[i] * wb[i]);
  }
}

void weighted_sum2_const(const double* a, const double* b, double wa,
                         double wb, double* out, std::size_t n) {
  const __m256d vwa = _mm256_set1_pd(wa);
  const __m256d vwb = _mm256_set1_pd(wb);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    const __m256d v =
        _mm256_add_pd(_mm256_mul_pd(va, vwa), _mm256_mul_pd(vb, vwb));
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) {
    out[i] = (a[i] * wa) + (b[i] * wb);
  }
}

void convex_blend(const double* a, const double* b, const double* t,
                  double* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    const __m256d vt = _mm256_loadu_pd(t + i);
    const __m256d v = _mm256_add_pd(_mm256_mul_pd(vt, va),
                                    _mm256_mul_pd(_mm256_sub_pd(one, vt), vb));
    const __m256d lo = _mm256_min_pd(va, vb);
    const __m256d hi = _mm256_max_pd(va, vb);
    _mm256_storeu_pd(out + i, _mm256_min_pd(_mm256_max_pd(v, lo), hi));
  }
  for (; i < n; ++i) {
    const double v = (t[i] * a[i]) + ((1.0 - t[i]) * b[i]);
    const double lo = std::min(a[i], b[i]);
    const double hi = std::max(a[i], b[i]);
    out[i] = std::min(std::max(v, lo), hi);
  }
}

void clip01(const double* in, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(in + i);
    _mm256_storeu_pd(out + i, _mm256_min_pd(_mm256_max_pd(v, zero), one));
  }
  for (; i < n; ++i) {
    out[i] = std::min(std::max(in[i], 0.0), 1.0);
  }
}

void quantize_unit(const double* in, double* out, std::size_t n,
                   double levels) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d vl = _mm256_set1_pd(levels);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_min_pd(_mm256_max_pd(_mm256_loadu_pd(in + i), zero), one);
    const __m256d r = _mm256_round_pd(_mm256_mul_pd(v, vl),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    _mm256_storeu_pd(out + i, _mm256_div_pd(r, vl));
  }
  for (; i < n; ++i) {
    const double v = std::min(std::max(in[i], 0.0), 1.0);
    out[i] = std::nearbyint(v * levels) / levels;
  }
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double result = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    result += d * d;
  }
  return result;
}

void canonical_core(const double* i0, const double* i1, const double* i2,
                    double* m, double* x, double* y, std::size_t n) {
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = _mm256_loadu_pd(i0 + i);
    const __m256d v1 = _mm256_loadu_pd(i1 + i);
    const __m256d v2 = _mm256_loadu_pd(i2 + i);
    const __m256d vm = _mm256_mul_pd(_mm256_add_pd(v0, v2), half);
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(x + i, _mm256_sub_pd(v0, vm));
    _mm256_storeu_pd(y + i, _mm256_sub_pd(vm, v1));
  }
  for (; i < n; ++i) {
    const double mi = (i0[i] + i2[i]) * 0.5;
    m[i] = mi;
    x[i] = i0[i] - mi;
    y[i] = mi - i1[i];
  }
}

void bilinear_gather(const double* src, const std::int32_t* i00,
                     const std::int32_t* i01, const std::int32_t* i10,
                     const std::int32_t* i11, const double* w00,
                     const double* w01, const double* w10, const double* w11,
                     double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i vi00 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(i00 + i));
    const __m128i vi01 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(i01 + i));
    const __m128i vi10 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(i10 + i));
    const __m128i vi11 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(i11 + i));
    const __m256d p00 = _mm256_i32gather_pd(src, vi00, 8);
    const __m256d p01 = _mm256_i32gather_pd(src, vi01, 8);
    const __m256d p10 = _mm256_i32gather_pd(src, vi10, 8);
    const __m256d p11 = _mm256_i32gather_pd(src, vi11, 8);
    const __m256d top = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(w00 + i), p00),
                                      _mm256_mul_pd(_mm256_loadu_pd(w01 + i), p01));
    const __m256d bot = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(w10 + i), p10),
                                      _mm256_mul_pd(_mm256_loadu_pd(w11 + i), p11));
    _mm256_storeu_pd(out + i, _mm256_add_pd(top, bot));
  }
  for (; i < n; ++i) {
    const double top = (w00[i] * src[i00[i]]) + (w01[i] * src[i01[i]]);
    const double bot = (w10[i] * src[i10[i]]) + (w11[i] * src[i11[i]]);
    out[i] = top + bot;
  }
}

}  // namespace avx2

const KernelTable* avx2_build_table() {
  static const KernelTable table = {
      "avx2",
      avx2::weighted_sum2,
      avx2::weighted_sum2_const,
      avx2::convex_blend,
      avx2::clip01,
      avx2::quantize_unit,
      avx2::sum_sq_diff,
      avx2::canonical_core,
      avx2::bilinear_gather,
  };
  return &table;
}

}  // namespace polarsep::kernels

#endif  // __AVX2__
