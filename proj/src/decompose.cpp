#include "polarsep/decompose.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "polarsep/errors.hpp"
#include "polarsep/imageops.hpp"
#include "polarsep/kernels.hpp"

namespace polarsep {
namespace {

constexpr double kPi = 3.141592653589793238462643383279;
constexpr double kHalfPi = kPi / 2.0;
constexpr double kQuarterPi = kPi / 4.0;
// Amplitudes below this (relative to the signal mean) leave phi_perp
// undefined: the pixel has no polarization contrast.
constexpr double kDegenerateAmplitude = 1e-12;

bool exact_quarter_spacing(const PolarStack& stack) {
  for (int i = 0; i < 3; ++i) {
    const double nominal = stack.nominal_phi0 + i * kQuarterPi;
    if (std::abs(stack.angles[i] - nominal) > 1e-12) return false;
  }
  return true;
}

// Reduce an angle into [-pi/4, pi/4) by a multiple of pi/2.
double reduce_phi(double phi) {
  const double k = std::floor((phi + kQuarterPi) / kHalfPi);
  return phi - k * kHalfPi;
}

struct Basis3x3 {
  // Inverse of the system matrix rows [1, cos(2 phi_i), sin(2 phi_i)].
  std::array<double, 9> inv;
};

Basis3x3 invert_angle_basis(const std::array<double, 3>& angles) {
  double m[9];
  for (int i = 0; i < 3; ++i) {
    m[i * 3 + 0] = 1.0;
    m[i * 3 + 1] = std::cos(2.0 * angles[i]);
    m[i * 3 + 2] = std::sin(2.0 * angles[i]);
  }
  const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) -
                     m[1] * (m[3] * m[8] - m[5] * m[6]) +
                     m[2] * (m[3] * m[7] - m[4] * m[6]);
  if (std::abs(det) < 1e-9) {
    throw SingularityError(
        "canonical_solve: realized polarizer angles are degenerate");
  }
  Basis3x3 b;
  b.inv = {
      (m[4] * m[8] - m[5] * m[7]) / det, (m[2] * m[7] - m[1] * m[8]) / det,
      (m[1] * m[5] - m[2] * m[4]) / det, (m[5] * m[6] - m[3] * m[8]) / det,
      (m[0] * m[8] - m[2] * m[6]) / det, (m[2] * m[3] - m[0] * m[5]) / det,
      (m[3] * m[7] - m[4] * m[6]) / det, (m[1] * m[6] - m[0] * m[7]) / det,
      (m[0] * m[4] - m[1] * m[3]) / det,
  };
  return b;
}

}  // namespace

CanonicalPair canonical_solve(const PolarStack& stack) {
  for (const ImageF& img : stack.images) {
    require_nonempty(img, "canonical_solve");
  }
  require_same_shape(stack.images[0], stack.images[1], "canonical_solve");
  require_same_shape(stack.images[0], stack.images[2], "canonical_solve");

  const ImageF& i0 = stack.images[0];
  const int width = i0.width();
  const int height = i0.height();
  const int channels = i0.channels();
  const std::size_t n = i0.sample_count();

  CanonicalPair out;
  out.i_perp = ImageF(width, height, channels);
  out.i_par = ImageF(width, height, channels);
  out.phi_perp_field = ImageF(width, height, 1);
  out.phi_defined = ImageF(width, height, 1);

  // Per-sample mean and phase components. For exact pi/4 spacing these come
  // from the closed form; otherwise from the 3x3 basis solve with the
  // realized angles. In both cases (xc, ys) is a vector whose direction
  // doubles the canonical angle and whose length is |I_perp - I_par| / 2.
  std::vector<double> m(n), xc(n), ys(n);
  double phase_offset;  // atan2(ys, xc) = phase_offset - 2 * phi_perp
  if (exact_quarter_spacing(stack)) {
    kernels::active().canonical_core(i0.data(), stack.images[1].data(),
                                     stack.images[2].data(), m.data(), xc.data(),
                                     ys.data(), n);
    phase_offset = 2.0 * stack.nominal_phi0;
  } else {
    // Basis solve yields (D cos 2phi_perp, D sin 2phi_perp); negating the
    // sin component gives atan2(ys, xc) = -2 phi_perp, matching the closed
    // form's u = phase_offset - 2 phi_perp with phase_offset = 0.
    const Basis3x3 b = invert_angle_basis(stack.angles);
    const double* d0 = i0.data();
    const double* d1 = stack.images[1].data();
    const double* d2 = stack.images[2].data();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = b.inv[0] * d0[i] + b.inv[1] * d1[i] + b.inv[2] * d2[i];
      xc[i] = b.inv[3] * d0[i] + b.inv[4] * d1[i] + b.inv[5] * d2[i];
      ys[i] = -(b.inv[6] * d0[i] + b.inv[7] * d1[i] + b.inv[8] * d2[i]);
    }
    phase_offset = 0.0;
  }

  const std::size_t pixels = i0.pixel_count();
  for (std::size_t p = 0; p < pixels; ++p) {
    const std::size_t base = p * channels;
    // Channels share one canonical direction but their signed amplitudes
    // may differ in sign, so the shared axis comes from the orientation
    // tensor of the per-channel phase vectors (axial mean), which is immune
    // to sign cancellation across channels.
    double sxx = 0.0, syy = 0.0, sxy = 0.0, mm = 0.0;
    for (int c = 0; c < channels; ++c) {
      const double x = xc[base + c];
      const double y = ys[base + c];
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
      mm += m[base + c];
    }
    mm /= channels;

    const double amplitude = std::sqrt((sxx + syy) / channels);
    double phi_perp = 0.0;
    double cu = 1.0, su = 0.0;  // projection direction at the pixel
    bool defined = false;
    if (amplitude > kDegenerateAmplitude * std::max(1.0, std::abs(mm))) {
      defined = true;
      const double u = 0.5 * std::atan2(2.0 * sxy, sxx - syy);  // axis, mod pi
      // u = phase_offset - 2 phi_perp (mod pi); the pi ambiguity is absorbed
      // by the reduction and the signed projection below.
      phi_perp = reduce_phi((phase_offset - u) * 0.5);
      const double u_hat = phase_offset - 2.0 * phi_perp;
      cu = std::cos(u_hat);
      su = std::sin(u_hat);
    }

    out.phi_perp_field.data()[p] = phi_perp;
    out.phi_defined.data()[p] = defined ? 1.0 : 0.0;
    for (int c = 0; c < channels; ++c) {
      // Signed amplitude along the shared direction keeps per-channel
      // contrast exact even when channels disagree in sign.
      const double amp = xc[base + c] * cu + ys[base + c] * su;
      const double perp = m[base + c] + amp;
      const double par = m[base + c] - amp;
      out.i_perp.data()[base + c] = perp < 0.0 ? 0.0 : perp;
      out.i_par.data()[base + c] = par < 0.0 ? 0.0 : par;
    }
  }
  return out;
}

std::pair<ImageF, ImageF> combine_residuals(const CanonicalPair& canon,
                                            const ResidualFields& residuals) {
  require_nonempty(canon.i_perp, "combine_residuals");
  require_same_shape(canon.i_perp, canon.i_par, "combine_residuals");
  require_same_shape(canon.i_perp, residuals.r_tilde, "combine_residuals");
  require_same_shape(canon.i_perp, residuals.t_tilde, "combine_residuals");
  const ImageF& base = canon.i_perp;
  for (const ImageF* xi : {&residuals.xi_perp, &residuals.xi_par}) {
    if (xi->channels() != 1 || xi->width() != base.width() ||
        xi->height() != base.height()) {
      throw InvalidInputError(
          "combine_residuals: weights must be single-channel with matching size");
    }
  }

  const int channels = base.channels();
  const std::size_t n = base.sample_count();
  // Expand the single-channel weights to per-sample arrays once.
  std::vector<double> w_perp(n), w_par(n);
  const std::size_t pixels = base.pixel_count();
  for (std::size_t p = 0; p < pixels; ++p) {
    const double wp = std::min(std::max(residuals.xi_perp.data()[p], 0.0), 1.0);
    const double wl = std::min(std::max(residuals.xi_par.data()[p], 0.0), 1.0);
    for (int c = 0; c < channels; ++c) {
      w_perp[p * channels + c] = wp;
      w_par[p * channels + c] = wl;
    }
  }

  ImageF r_hat(base.width(), base.height(), channels);
  ImageF t_hat(base.width(), base.height(), channels);
  const auto& k = kernels::active();
  k.convex_blend(residuals.r_tilde.data(), canon.i_perp.data(), w_perp.data(),
                 r_hat.data(), n);
  k.convex_blend(residuals.t_tilde.data(), canon.i_par.data(), w_par.data(),
                 t_hat.data(), n);
  return {std::move(r_hat), std::move(t_hat)};
}

std::pair<ImageF, ImageF> fresnel_inverse_separate(const CanonicalPair& canon,
                                                   const AoiField& aoi,
                                                   const OpticalConfig& cfg,
                                                   const SeparateOptions& opts) {
  require_nonempty(canon.i_perp, "fresnel_inverse_separate");
  require_same_shape(canon.i_perp, canon.i_par, "fresnel_inverse_separate");
  const int width = canon.i_perp.width();
  if (aoi.width() != width) {
    throw InvalidInputError("fresnel_inverse_separate: aoi width mismatch");
  }

  const int channels = canon.i_perp.channels();
  const std::size_t row = static_cast<std::size_t>(width) * channels;

  // Per-column 2x2 inverse coefficients; ill-conditioned columns collected.
  std::vector<double> kr_perp(row), kr_par(row), kt_perp(row), kt_par(row);
  std::vector<int> singular;
  for (int x = 0; x < width; ++x) {
    const FresnelCoeffs f = fresnel(aoi.theta(x), cfg);
    const double d = f.r_s - f.r_p;
    double a = 0.0, b = 0.0, c = 0.0, e = 0.0;
    if (std::abs(d) < opts.cond_epsilon) {
      singular.push_back(x);
    } else {
      a = 2.0 * (1.0 - f.r_p) / d;   // R_hat <- I_perp
      b = -2.0 * (1.0 - f.r_s) / d;  // R_hat <- I_par
      c = -2.0 * f.r_p / d;          // T_hat <- I_perp
      e = 2.0 * f.r_s / d;           // T_hat <- I_par
    }
    for (int ch = 0; ch < channels; ++ch) {
      const std::size_t i = static_cast<std::size_t>(x) * channels + ch;
      kr_perp[i] = a;
      kr_par[i] = b;
      kt_perp[i] = c;
      kt_par[i] = e;
    }
  }
  if (!singular.empty() && !opts.allow_singular) {
    std::ostringstream msg;
    msg << "fresnel_inverse_separate: |r_s - r_p| < " << opts.cond_epsilon
        << " at " << singular.size() << " column(s):";
    for (std::size_t i = 0; i < singular.size() && i < 8; ++i) {
      msg << ' ' << singular[i];
    }
    if (singular.size() > 8) msg << " ...";
    throw SingularityError(msg.str(), singular);
  }

  ImageF r_hat(width, canon.i_perp.height(), channels);
  ImageF t_hat(width, canon.i_perp.height(), channels);
  const auto& k = kernels::active();
  for (int y = 0; y < canon.i_perp.height(); ++y) {
    const std::size_t off = static_cast<std::size_t>(y) * row;
    k.weighted_sum2(canon.i_perp.data() + off, canon.i_par.data() + off,
                    kr_perp.data(), kr_par.data(), r_hat.data() + off, row);
    k.weighted_sum2(canon.i_perp.data() + off, canon.i_par.data() + off,
                    kt_perp.data(), kt_par.data(), t_hat.data() + off, row);
  }
  k.clip01(r_hat.data(), r_hat.data(), r_hat.sample_count());
  k.clip01(t_hat.data(), t_hat.data(), t_hat.sample_count());
  return {std::move(r_hat), std::move(t_hat)};
}

std::pair<ImageF, ImageF> canonical_baseline_separate(const CanonicalPair& canon) {
  require_nonempty(canon.i_perp, "canonical_baseline_separate");
  require_same_shape(canon.i_perp, canon.i_par, "canonical_baseline_separate");
  const std::size_t n = canon.i_perp.sample_count();
  ImageF r_hat(canon.i_perp.width(), canon.i_perp.height(), canon.i_perp.channels());
  ImageF t_hat = r_hat;
  const auto& k = kernels::active();
  k.weighted_sum2_const(canon.i_perp.data(), canon.i_par.data(), 2.0, -2.0,
                        r_hat.data(), n);
  k.weighted_sum2_const(canon.i_par.data(), canon.i_par.data(), 1.0, 1.0,
                        t_hat.data(), n);
  k.clip01(r_hat.data(), r_hat.data(), n);
  k.clip01(t_hat.data(), t_hat.data(), n);
  return {std::move(r_hat), std::move(t_hat)};
}

double quantization_error_bound(double theta, const OpticalConfig& cfg,
                                int bits) {
  if (bits != 8 && bits != 16) {
    throw InvalidInputError("quantization_error_bound: bits must be 8 or 16");
  }
  const FresnelCoeffs f = fresnel(theta, cfg);
  const double levels = (bits == 8) ? 255.0 : 65535.0;
  const double q = 1.0 / levels;
  const double d = f.r_s - f.r_p;
  return q * (1.0 + 2.0 * (2.0 - f.r_s - f.r_p) / d);
}

}  // namespace polarsep
