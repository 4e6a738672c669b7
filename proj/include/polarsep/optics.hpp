#pragma once

#include "polarsep/geometry.hpp"
#include "polarsep/image.hpp"

namespace polarsep {

// Single air/glass interface; the second pane surface and absorption are
// ignored. Wavelength-independent indices.
struct OpticalConfig {
  double n1 = 1.0;  // incidence medium
  double n2 = 1.5;  // semi-reflector (crown glass default)
};

// Power reflectances of a single interface at angle of incidence theta.
// External reflection (n2 > n1) keeps r_p <= r_s, with r_p = 0 at the
// Brewster angle.
struct FresnelCoeffs {
  double r_s = 0.0;
  double r_p = 0.0;
  double theta = 0.0;
};

// Standard single-interface power reflectances via the amplitude form
// (n1 cos(ti) - n2 cos(tt)) / (n1 cos(ti) + n2 cos(tt)), exact at theta = 0.
// theta must lie in [0, pi/2).
FresnelCoeffs fresnel(double theta, const OpticalConfig& cfg = {});

// atan(n2/n1).
double brewster(const OpticalConfig& cfg = {});

// Mixing coefficient of the two-layer observation model:
//   alpha = r_s(theta) cos^2(phi - phi_perp) + r_p(theta) sin^2(phi - phi_perp)
// The complementary transmission weight is exactly 1 - alpha because the
// single-interface transmittances are 1 - r_s and 1 - r_p.
double mixing_alpha(double theta, double phi_perp, double phi,
                    const OpticalConfig& cfg = {});

// Renders one polarized observation:
//   I_phi(x) = alpha(theta(x), phi_perp, phi) * I_R(x)/2
//            + (1 - alpha(theta(x), phi_perp, phi)) * I_T(x)/2
// theta varies per column via `aoi` (aoi.width must equal the image width).
// Output is unclipped linear floats.
ImageF observe(const ImageF& i_r, const ImageF& i_t, const AoiField& aoi,
               double phi_perp, double phi, const OpticalConfig& cfg = {});

// Projection of canonical images to a polarizer orientation:
//   I_phi(x) = I_perp(x) cos^2(phi - phi_perp(x)) + I_par(x) sin^2(...)
// phi_perp_field is single-channel with the images' width/height.
ImageF malus_project(const ImageF& i_perp, const ImageF& i_par,
                     const ImageF& phi_perp_field, double phi);

void validate_optics(const OpticalConfig& cfg);

}  // namespace polarsep
