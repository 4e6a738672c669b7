#include "polarsep/imageops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "polarsep/errors.hpp"
#include "polarsep/kernels.hpp"

namespace polarsep {
namespace {

ImageF pow_samples(const ImageF& img, double exponent) {
  require_nonempty(img, "gamma");
  if (exponent == 1.0) return img;
  ImageF out(img.width(), img.height(), img.channels());
  const std::size_t n = img.sample_count();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = img.data()[i];
    if (s < 0.0) throw InvalidInputError("gamma: negative sample");
    out.data()[i] = std::pow(s, exponent);
  }
  return out;
}

// Empirical CDF sampled at the edges of kHistogramBins bins spanning
// [lo, hi]; edges[0] = 0, edges[B] = 1.
struct ChannelCdf {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> edges;

  bool degenerate() const { return !(hi > lo); }

  // Quantile of a value, linearly interpolated inside its bin. A degenerate
  // (constant) channel sits at the mid-distribution quantile 0.5.
  double quantile(double v) const {
    if (degenerate()) return 0.5;
    const int b = kHistogramBins;
    double pos = (v - lo) / (hi - lo) * b;
    pos = std::clamp(pos, 0.0, static_cast<double>(b));
    int k = std::min(static_cast<int>(pos), b - 1);
    const double frac = pos - k;
    return edges[k] + frac * (edges[k + 1] - edges[k]);
  }

  // Inverse CDF; plateaus resolve to their right edge.
  double value(double q) const {
    if (degenerate()) return lo;
    const int b = kHistogramBins;
    auto it = std::upper_bound(edges.begin(), edges.end(), q);
    int k = static_cast<int>(it - edges.begin()) - 1;
    k = std::clamp(k, 0, b - 1);
    const double d = edges[k + 1] - edges[k];
    const double frac = d > 0.0 ? std::clamp((q - edges[k]) / d, 0.0, 1.0) : 0.5;
    return lo + (k + frac) / b * (hi - lo);
  }
};

ChannelCdf build_cdf(const ImageF& img, int channel) {
  ChannelCdf cdf;
  cdf.lo = std::numeric_limits<double>::infinity();
  cdf.hi = -std::numeric_limits<double>::infinity();
  const int c = img.channels();
  const double* data = img.data();
  const std::size_t n = img.sample_count();
  for (std::size_t i = channel; i < n; i += c) {
    cdf.lo = std::min(cdf.lo, data[i]);
    cdf.hi = std::max(cdf.hi, data[i]);
  }
  cdf.edges.assign(kHistogramBins + 1, 0.0);
  if (cdf.degenerate()) return cdf;

  std::vector<std::size_t> hist(kHistogramBins, 0);
  const double scale = kHistogramBins / (cdf.hi - cdf.lo);
  std::size_t count = 0;
  for (std::size_t i = channel; i < n; i += c) {
    int k = static_cast<int>((data[i] - cdf.lo) * scale);
    k = std::clamp(k, 0, kHistogramBins - 1);
    ++hist[k];
    ++count;
  }
  double acc = 0.0;
  for (int k = 0; k < kHistogramBins; ++k) {
    acc += static_cast<double>(hist[k]) / static_cast<double>(count);
    cdf.edges[k + 1] = acc;
  }
  cdf.edges[kHistogramBins] = 1.0;
  return cdf;
}

}  // namespace

ImageF gamma_expand(const ImageF& img, double gamma) {
  if (!(gamma > 0.0)) throw InvalidInputError("gamma_expand: gamma must be positive");
  return pow_samples(img, 1.0 / gamma);
}

ImageF gamma_compress(const ImageF& img, double gamma) {
  if (!(gamma > 0.0)) throw InvalidInputError("gamma_compress: gamma must be positive");
  return pow_samples(img, gamma);
}

ImageF clip01(const ImageF& img) {
  require_nonempty(img, "clip01");
  ImageF out(img.width(), img.height(), img.channels());
  kernels::active().clip01(img.data(), out.data(), img.sample_count());
  return out;
}

ImageF clip_quantize(const ImageF& img, int bits) {
  require_nonempty(img, "clip_quantize");
  if (bits != 8 && bits != 16) {
    throw InvalidInputError("clip_quantize: bits must be 8 or 16");
  }
  const double levels = (bits == 8) ? 255.0 : 65535.0;
  ImageF out(img.width(), img.height(), img.channels());
  kernels::active().quantize_unit(img.data(), out.data(), img.sample_count(),
                                  levels);
  return out;
}

ImageF histogram_match(const ImageF& src, const ImageF& ref) {
  require_nonempty(src, "histogram_match");
  require_nonempty(ref, "histogram_match");
  if (src.channels() != ref.channels()) {
    throw InvalidInputError("histogram_match: channel counts differ");
  }

  ImageF out(src.width(), src.height(), src.channels());
  const int c = src.channels();
  const std::size_t n = src.sample_count();
  for (int ch = 0; ch < c; ++ch) {
    const ChannelCdf src_cdf = build_cdf(src, ch);
    const ChannelCdf ref_cdf = build_cdf(ref, ch);
    for (std::size_t i = ch; i < n; i += c) {
      out.data()[i] = ref_cdf.value(src_cdf.quantile(src.data()[i]));
    }
  }
  return out;
}

}  // namespace polarsep
