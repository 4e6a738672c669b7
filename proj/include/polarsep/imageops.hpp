#pragma once

#include "polarsep/image.hpp"

namespace polarsep {

// Bin count of the empirical CDFs used by histogram matching. Fixed;
// matching itself is parameter-free.
inline constexpr int kHistogramBins = 1024;

// Maps every sample s to s^(1/gamma). Samples must be non-negative.
// gamma = 1/2.2 reproduces the usual 2.2 expansion exponent.
ImageF gamma_expand(const ImageF& img, double gamma);

// Inverse of gamma_expand: s -> s^gamma.
ImageF gamma_compress(const ImageF& img, double gamma);

// Samples clamped to [0,1].
ImageF clip01(const ImageF& img);

// Clamp to [0,1] and quantize to 2^bits - 1 levels; bits in {8, 16}.
// Simulates LDR sensor readout.
ImageF clip_quantize(const ImageF& img, int bits);

// Per-channel monotone CDF-to-CDF remapping of src onto ref's empirical
// distribution (1024-bin CDFs, linear interpolation, mid-distribution
// convention: a constant channel sits at quantile 0.5). Output has src's
// dimensions; channel counts must match.
ImageF histogram_match(const ImageF& src, const ImageF& ref);

}  // namespace polarsep
