#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polarsep/geometry.hpp"
#include "polarsep/image.hpp"
#include "polarsep/optics.hpp"
#include "polarsep/rng.hpp"

namespace polarsep {

// Synthesis stages: dynamic-range manipulation (plus localized-reflection
// masking), non-rigid deformation, and local curvature generation.
struct StageSet {
  bool dr = true;
  bool nrd = true;
  bool lcg = true;
};

struct SynthConfig {
  double beta_max = 2.8;         // beta ~ U[1, beta_max]
  double gamma_exponent = 2.2;   // exponent applied when linearizing inputs
  double mask_probability = 0.3;
  double nrd_probability = 0.5;
  double nrd_sigma_max = 4.0;    // pixels; sigma ~ U[0, nrd_sigma_max]
  int nrd_grid_spacing = 16;     // pixels between warp anchors
  bool warp_both_layers = false; // warp the transmission layer too
  double angle_noise_deg = 4.0;  // polarizer angle noise, +/- degrees
  int patch_size = 128;
  int quantize_bits = 8;         // 0 keeps observations as raw floats
  StageSet stages;
  OpticalConfig optics;
  GeometryRanges geometry;
  // Uniform angle of incidence drawn from this interval when lcg is off.
  std::array<double, 2> uniform_theta_range{0.1, 1.4};

  // Test/calibration pins; a set value bypasses the corresponding draw.
  std::optional<double> fixed_theta;
  std::optional<double> fixed_phi_perp;
  std::optional<double> fixed_phi0;
  std::optional<double> fixed_beta;

  void validate() const;  // throws ConfigError
};

// Three co-registered observations with their realized polarizer angles.
// Nominal spacing is phi_i = phi0 + i*pi/4; realized angles carry the noise.
struct PolarStack {
  std::array<ImageF, 3> images;
  std::array<double, 3> angles{0.0, 0.0, 0.0};
  double nominal_phi0 = 0.0;
};

// Every sampled parameter of one synthetic sample; serialized to meta.json.
struct Provenance {
  std::uint64_t seed = 0;
  int patch_size = 0;
  std::array<int, 2> crop_reflection{0, 0};
  std::array<int, 2> crop_transmission{0, 0};
  std::string source_reflection;
  std::string source_transmission;
  StageSet stages;
  bool dr_applied = false;
  double beta = 1.0;
  double gamma_exponent = 1.0;
  bool mask_applied = false;
  std::string masked_layer = "none";  // "reflection" | "transmission" | "none"
  bool nrd_applied = false;
  double nrd_sigma = 0.0;
  int nrd_grid_spacing = 0;
  bool warp_both_layers = false;
  double phi0 = 0.0;
  std::array<double, 3> angles{0.0, 0.0, 0.0};
  double angle_noise_deg = 0.0;
  double phi_perp = 0.0;
  int quantize_bits = 8;
  OpticalConfig optics;
  bool uniform_aoi = true;
  double uniform_theta = 0.0;
  SurfaceGeometry geometry;  // meaningful when !uniform_aoi
};

// One synthetic training sample: observations, clipped ground-truth layers
// ("observable components", held at 32-bit float precision so the PFM round
// trip is exact), and full provenance.
struct SampleRecord {
  PolarStack stack;
  ImageF gt_reflection;
  ImageF gt_transmission;
  double phi_perp = 0.0;
  AoiField aoi;
  Provenance provenance;
};

// Dynamic-range manipulation: both inputs are raised to gamma_exponent
// (linearization), then the reflection is boosted by beta and the
// transmission attenuated by 1/beta. Outputs are unclipped. beta >= 1.
std::pair<ImageF, ImageF> dynamic_range(const ImageF& i_r, const ImageF& i_t,
                                        double beta, double gamma_exponent);

// Zeroes the pixels of `layer` whose channel-mean intensity falls below
// t = mean(layer + other), the mean taken over all pixels and channels.
ImageF threshold_mask(const ImageF& layer, const ImageF& other);

// Anchor-grid dimensions used by the non-rigid warp for a given image size.
std::pair<int, int> warp_grid_dims(int width, int height, int grid_spacing);

// Non-rigid warp with explicit per-anchor displacements (row-major anchor
// order, sizes from warp_grid_dims). Dense displacements are bilinear
// between anchors; sampling is bilinear with edge clamping. This is the
// deterministic core of nonrigid_warp and doubles as its test hook.
ImageF warp_with_anchor_displacements(const ImageF& img, int grid_spacing,
                                      const std::vector<double>& dx,
                                      const std::vector<double>& dy);

// Random non-rigid deformation: every anchor moves by Gaussian (dx, dy)
// with standard deviation sigma, clamped to +/- 3 sigma. sigma = 0 is a
// bit-exact identity.
ImageF nonrigid_warp(const ImageF& img, int grid_spacing, double sigma,
                     Rng& rng);

// phi_i = phi0 + i*pi/4 + u_i with u_i uniform in +/- noise_deg degrees.
std::array<double, 3> perturb_angles(double phi0, double noise_deg, Rng& rng);

// Runs the full generation pipeline on a source image pair:
//   crop -> DR (gamma linearization, beta boost/attenuation) -> mask -> clip to
//   the observable layers -> per-observation NRD -> AOI sampling ->
//   observation rendering at perturbed angles -> quantization.
// Bit-exactly reproducible from (sources, cfg, seed).
SampleRecord synthesize_sample(const ImageF& src_r, const ImageF& src_t,
                               const SynthConfig& cfg, std::uint64_t seed,
                               const std::string& source_r_id = "",
                               const std::string& source_t_id = "");

}  // namespace polarsep
