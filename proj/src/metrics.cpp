#include "polarsep/metrics.hpp"

#include <cmath>

#include "polarsep/errors.hpp"
#include "polarsep/kernels.hpp"

namespace polarsep {

double rmse(const ImageF& a, const ImageF& b) {
  require_nonempty(a, "rmse");
  require_same_shape(a, b, "rmse");
  const std::size_t n = a.sample_count();
  const double ss = kernels::active().sum_sq_diff(a.data(), b.data(), n);
  return std::sqrt(ss / static_cast<double>(n));
}

double psnr_from_rmse(double rmse_value, double peak) {
  if (peak <= 0.0) throw InvalidInputError("psnr: peak must be positive");
  if (rmse_value < 0.0) throw InvalidInputError("psnr: rmse must be non-negative");
  if (rmse_value == 0.0) return kPsnrCapDb;
  return 20.0 * std::log10(peak / rmse_value);
}

double psnr(const ImageF& a, const ImageF& b, double peak) {
  return psnr_from_rmse(rmse(a, b), peak);
}

MetricReport make_report(std::vector<MetricReport::Entry> entries) {
  MetricReport report;
  report.per_image = std::move(entries);
  if (report.per_image.empty()) return report;
  double sum_rmse = 0.0;
  double sum_psnr = 0.0;
  for (const auto& e : report.per_image) {
    sum_rmse += e.rmse;
    sum_psnr += e.psnr;
  }
  const double n = static_cast<double>(report.per_image.size());
  report.mean_rmse = sum_rmse / n;
  report.mean_psnr = sum_psnr / n;
  return report;
}

}  // namespace polarsep
