#pragma once

#include <utility>

#include "polarsep/geometry.hpp"
#include "polarsep/image.hpp"
#include "polarsep/optics.hpp"
#include "polarsep/synth.hpp"

namespace polarsep {

// Conditioning floor on |r_s - r_p| for the closed-form inversion; below it
// quantization noise is amplified beyond ~2000x and the column carries no
// usable polarization contrast.
inline constexpr double kConditionEpsilon = 1e-3;

// Canonical projection output: per-pixel I_perp, I_par and the p-polarization
// direction phi_perp in [-pi/4, pi/4). phi_perp is undefined where
// I_perp == I_par; those pixels hold 0 and are flagged 0 in phi_defined.
struct CanonicalPair {
  ImageF i_perp;
  ImageF i_par;
  ImageF phi_perp_field;  // single-channel, radians
  ImageF phi_defined;     // single-channel, 1 where phi_perp is meaningful
};

// Residual reflection/transmission images with their blend weights,
// normally produced by an external predictor. Weights are clamped to [0,1]
// on construction.
struct ResidualFields {
  ImageF r_tilde;
  ImageF t_tilde;
  ImageF xi_perp;  // single-channel
  ImageF xi_par;   // single-channel
};

// Per-pixel inversion of the three-observation projection model. For stacks
// at exact pi/4 spacing the closed form is used:
//   S = I0 + I2, x = I0 - S/2, y = S/2 - I1,
//   phi_perp = phi0 - atan2(y, x)/2 reduced into [-pi/4, pi/4),
//   I_perp = S/2 + A, I_par = S/2 - A (A carries the reduction sign).
// Otherwise the same three-unknown trigonometric system is solved with the
// realized angles. Multi-channel stacks share one phi_perp per pixel,
// estimated from the channel-mean phase vector; negative canonical values
// are projected to 0.
CanonicalPair canonical_solve(const PolarStack& stack);

// Residual recombination:
//   R_hat = xi_perp * R_tilde + (1 - xi_perp) * I_perp
//   T_hat = xi_par  * T_tilde + (1 - xi_par)  * I_par
// Outputs are pinned inside the per-pixel [min, max] of the two blended
// values (convexity contract).
std::pair<ImageF, ImageF> combine_residuals(const CanonicalPair& canon,
                                            const ResidualFields& residuals);

struct SeparateOptions {
  double cond_epsilon = kConditionEpsilon;
  // Zero out ill-conditioned columns instead of failing.
  bool allow_singular = false;
};

// Closed-form separation: per column, invert
//   I_perp = r_s I_R/2 + (1-r_s) I_T/2
//   I_par  = r_p I_R/2 + (1-r_p) I_T/2
// and clip the recovered layers to [0,1]. Columns with
// |r_s - r_p| < cond_epsilon raise SingularityError naming them unless
// allow_singular is set.
std::pair<ImageF, ImageF> fresnel_inverse_separate(
    const CanonicalPair& canon, const AoiField& aoi,
    const OpticalConfig& cfg = {}, const SeparateOptions& opts = {});

// Geometry-free fallback, the Brewster-angle limit of the inverse up to the
// reflectance scale: R_hat = clip(2(I_perp - I_par)), T_hat = clip(2 I_par).
// Qualitative away from the Brewster angle.
std::pair<ImageF, ImageF> canonical_baseline_separate(const CanonicalPair& canon);

// Worst-case per-pixel error of fresnel_inverse_separate when the three
// observations are quantized to 2^bits - 1 levels:
//   q * (1 + 2 * (2 - r_s - r_p) / (r_s - r_p)),  q = 1 / (2^bits - 1).
// Derived by propagating the rounding box through S, A and the 2x2 inverse;
// exact for single-channel stacks (the amplitude is 1-Lipschitz in the
// phase vector). Multi-channel stacks estimate the shared axis from all
// channels; at pixels with almost no polarization contrast in any channel
// the axis noise can stretch the per-pixel error to ~2.5x this value.
double quantization_error_bound(double theta, const OpticalConfig& cfg,
                                int bits);

}  // namespace polarsep
