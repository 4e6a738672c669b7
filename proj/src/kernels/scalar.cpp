// Scalar reference kernels. These define the numerical contract: the SIMD
// variants replicate the exact operation order used here.

#include "polarsep/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace polarsep::kernels {
namespace scalar {

void weighted_sum2(const double* a, const double* b, const double* wa,
                   const double* wb, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (a[i] * wa[i]) + (b[i] * wb[i]);
  }
}

void weighted_sum2_const(const double* a, const double* b, double wa,
                         double wb, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (a[i] * wa) + (b[i] * wb);
  }
}

void convex_blend(const double* a, const double* b, const double* t,
                  double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = (t[i] * a[i]) + ((1.0 - t[i]) * b[i]);
    const double lo = std::min(a[i], b[i]);
    const double hi = std::max(a[i], b[i]);
    out[i] = std::min(std::max(v, lo), hi);
  }
}

void clip01(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::min(std::max(in[i], 0.0), 1.0);
  }
}

void quantize_unit(const double* in, double* out, std::size_t n,
                   double levels) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::min(std::max(in[i], 0.0), 1.0);
    out[i] = std::nearbyint(v * levels) / levels;
  }
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void canonical_core(const double* i0, const double* i1, const double* i2,
                    double* m, double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
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
  for (std::size_t i = 0; i < n; ++i) {
    const double top = (w00[i] * src[i00[i]]) + (w01[i] * src[i01[i]]);
    const double bot = (w10[i] * src[i10[i]]) + (w11[i] * src[i11[i]]);
    out[i] = top + bot;
  }
}

}  // namespace scalar

const KernelTable& scalar_table() {
  static const KernelTable table = {
      "scalar",
      scalar::weighted_sum2,
      scalar::weighted_sum2_const,
      scalar::convex_blend,
      scalar::clip01,
      scalar::quantize_unit,
      scalar::sum_sq_diff,
      scalar::canonical_core,
      scalar::bilinear_gather,
  };
  return table;
}

}  // namespace polarsep::kernels
