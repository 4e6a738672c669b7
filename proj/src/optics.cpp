#include "polarsep/optics.hpp"

#include <cmath>
#include <vector>

#include "polarsep/errors.hpp"
#include "polarsep/kernels.hpp"

namespace polarsep {
namespace {

constexpr double kHalfPi = 1.5707963267948966;

}  // namespace

void validate_optics(const OpticalConfig& cfg) {
  if (!(cfg.n1 >= 1.0) || !(cfg.n2 > cfg.n1)) {
    throw InvalidInputError("optics: require n2 > n1 >= 1");
  }
}

FresnelCoeffs fresnel(double theta, const OpticalConfig& cfg) {
  validate_optics(cfg);
  if (!(theta >= 0.0) || theta >= kHalfPi) {
    throw InvalidInputError("fresnel: theta outside [0, pi/2)");
  }
  const double ci = std::cos(theta);
  const double si = std::sin(theta);
  // Snell: n1 sin(ti) = n2 sin(tt); n2 > n1 keeps the root real.
  const double st = cfg.n1 * si / cfg.n2;
  const double ct = std::sqrt(1.0 - st * st);

  const double rs_amp = (cfg.n1 * ci - cfg.n2 * ct) / (cfg.n1 * ci + cfg.n2 * ct);
  const double rp_amp = (cfg.n2 * ci - cfg.n1 * ct) / (cfg.n2 * ci + cfg.n1 * ct);

  FresnelCoeffs out;
  out.theta = theta;
  out.r_s = rs_amp * rs_amp;
  out.r_p = rp_amp * rp_amp;
  return out;
}

double brewster(const OpticalConfig& cfg) {
  validate_optics(cfg);
  return std::atan2(cfg.n2, cfg.n1);
}

double mixing_alpha(double theta, double phi_perp, double phi,
                    const OpticalConfig& cfg) {
  const FresnelCoeffs f = fresnel(theta, cfg);
  const double c = std::cos(phi - phi_perp);
  const double s = std::sin(phi - phi_perp);
  return f.r_s * (c * c) + f.r_p * (s * s);
}

ImageF observe(const ImageF& i_r, const ImageF& i_t, const AoiField& aoi,
               double phi_perp, double phi, const OpticalConfig& cfg) {
  require_nonempty(i_r, "observe");
  require_same_shape(i_r, i_t, "observe");
  if (aoi.width() != i_r.width()) {
    throw InvalidInputError("observe: aoi width does not match image width");
  }

  const int width = i_r.width();
  const int channels = i_r.channels();
  const std::size_t row = static_cast<std::size_t>(width) * channels;

  // alpha depends on the column only; expand the mixing weights to one row.
  std::vector<double> wr(row);
  std::vector<double> wt(row);
  for (int x = 0; x < width; ++x) {
    const double alpha = mixing_alpha(aoi.theta(x), phi_perp, phi, cfg);
    for (int c = 0; c < channels; ++c) {
      wr[static_cast<std::size_t>(x) * channels + c] = alpha * 0.5;
      wt[static_cast<std::size_t>(x) * channels + c] = (1.0 - alpha) * 0.5;
    }
  }

  ImageF out(width, i_r.height(), channels);
  const auto& k = kernels::active();
  for (int y = 0; y < i_r.height(); ++y) {
    const std::size_t off = static_cast<std::size_t>(y) * row;
    k.weighted_sum2(i_r.data() + off, i_t.data() + off, wr.data(), wt.data(),
                    out.data() + off, row);
  }
  return out;
}

ImageF malus_project(const ImageF& i_perp, const ImageF& i_par,
                     const ImageF& phi_perp_field, double phi) {
  require_nonempty(i_perp, "malus_project");
  require_same_shape(i_perp, i_par, "malus_project");
  if (phi_perp_field.channels() != 1 ||
      phi_perp_field.width() != i_perp.width() ||
      phi_perp_field.height() != i_perp.height()) {
    throw InvalidInputError(
        "malus_project: phi_perp field must be single-channel with matching size");
  }

  const int width = i_perp.width();
  const int channels = i_perp.channels();
  const std::size_t row = static_cast<std::size_t>(width) * channels;

  std::vector<double> wc(row);
  std::vector<double> ws(row);
  ImageF out(width, i_perp.height(), channels);
  const auto& k = kernels::active();
  for (int y = 0; y < i_perp.height(); ++y) {
    for (int x = 0; x < width; ++x) {
      const double c = std::cos(phi - phi_perp_field.at(x, y, 0));
      const double c2 = c * c;
      for (int ch = 0; ch < channels; ++ch) {
        wc[static_cast<std::size_t>(x) * channels + ch] = c2;
        ws[static_cast<std::size_t>(x) * channels + ch] = 1.0 - c2;
      }
    }
    const std::size_t off = static_cast<std::size_t>(y) * row;
    k.weighted_sum2(i_perp.data() + off, i_par.data() + off, wc.data(),
                    ws.data(), out.data() + off, row);
  }
  return out;
}

}  // namespace polarsep
