#pragma once

#include <string>
#include <vector>

#include "polarsep/image.hpp"

namespace polarsep {

// PSNR reported for identical images; keeps reports free of infinities.
inline constexpr double kPsnrCapDb = 99.0;

// Root of the mean squared per-sample difference across all channels.
// Shapes must match.
double rmse(const ImageF& a, const ImageF& b);

// 20*log10(peak/rmse); kPsnrCapDb when rmse == 0. peak must be positive.
double psnr(const ImageF& a, const ImageF& b, double peak = 1.0);
double psnr_from_rmse(double rmse_value, double peak = 1.0);

// Per-image metrics plus their per-image-then-averaged means. Means average
// the per-image values; mean psnr is NOT -20*log10(mean rmse).
struct MetricReport {
  struct Entry {
    std::string id;
    double rmse = 0.0;
    double psnr = 0.0;
  };
  double mean_rmse = 0.0;
  double mean_psnr = 0.0;
  std::vector<Entry> per_image;
};

MetricReport make_report(std::vector<MetricReport::Entry> entries);

}  // namespace polarsep
