#pragma once

#include <cstddef>
#include <cstdint>

namespace polarsep::kernels {

// Data-parallel inner loops shared by the image pipeline. The scalar table
// is the reference; SIMD variants are selected at runtime and must match the
// scalar results bit-for-bit for the elementwise maps (identical operation
// order, no FMA contraction) and to ~1-ulp relative error for the
// reductions, which accumulate in a different order. Equivalence is enforced
// by tests/unit/test_kernels.cpp.
struct KernelTable {
  const char* name;

  // out[i] = a[i]*wa[i] + b[i]*wb[i]
  void (*weighted_sum2)(const double* a, const double* b, const double* wa,
                        const double* wb, double* out, std::size_t n);

  // out[i] = a[i]*wa + b[i]*wb
  void (*weighted_sum2_const)(const double* a, const double* b, double wa,
                              double wb, double* out, std::size_t n);

  // out[i] = clamp(t[i]*a[i] + (1-t[i])*b[i], min(a[i],b[i]), max(a[i],b[i]))
  // The clamp pins the convexity contract against 1-ulp blend overshoot.
  void (*convex_blend)(const double* a, const double* b, const double* t,
                       double* out, std::size_t n);

  // out[i] = clamp(in[i], 0, 1)
  void (*clip01)(const double* in, double* out, std::size_t n);

  // out[i] = nearbyint(clamp(in[i],0,1) * levels) / levels
  // Round-half-to-even in both variants (default FP environment).
  void (*quantize_unit)(const double* in, double* out, std::size_t n,
                        double levels);

  // sum over i of (a[i]-b[i])^2; scalar reference accumulates sequentially.
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);

  // m = (i0+i2)/2; x = i0-m; y = m-i1  (canonical-projection core)
  void (*canonical_core)(const double* i0, const double* i1, const double* i2,
                         double* m, double* x, double* y, std::size_t n);

  // out[i] = (w00[i]*src[i00[i]] + w01[i]*src[i01[i]])
  //        + (w10[i]*src[i10[i]] + w11[i]*src[i11[i]])
  void (*bilinear_gather)(const double* src, const std::int32_t* i00,
                          const std::int32_t* i01, const std::int32_t* i10,
                          const std::int32_t* i11, const double* w00,
                          const double* w01, const double* w10,
                          const double* w11, double* out, std::size_t n);
};

// Reference implementation; always available.
const KernelTable& scalar_table();

// AVX2 variants, or nullptr when the build or the CPU lacks them.
const KernelTable* avx2_table();

// Runtime-selected table. Honors POLARSEP_KERNELS=scalar|avx2|auto once at
// first use; unavailable requests fall back to scalar with a warning.
const KernelTable& active();

// Test hook: overrides the active table for the rest of the process.
void set_active(const KernelTable& table);

}  // namespace polarsep::kernels
