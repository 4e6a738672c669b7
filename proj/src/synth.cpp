#include "polarsep/synth.hpp"

#include <cmath>
#include <cstdint>
#include <tuple>

#include "polarsep/errors.hpp"
#include "polarsep/imageops.hpp"
#include "polarsep/kernels.hpp"

namespace polarsep {
namespace {

constexpr double kPi = 3.141592653589793238462643383279;
constexpr double kQuarterPi = kPi / 4.0;
constexpr double kDegToRad = kPi / 180.0;

// Fixed sub-stream ids of a sample seed. Stage isolation: toggling one
// stage never shifts the draws of another. Streams 0 and 8+ belong to the
// dataset driver (source pairing).
enum Stream : std::uint64_t {
  kStreamCrop = 1,
  kStreamDr = 2,
  kStreamMask = 3,
  kStreamNrd = 4,
  kStreamGeometry = 5,
  kStreamPhi = 6,
  kStreamAngles = 7,
};

ImageF scale_samples(const ImageF& img, double factor) {
  ImageF out(img.width(), img.height(), img.channels());
  const std::size_t n = img.sample_count();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = img.data()[i] * factor;
  return out;
}

// Ground-truth layers are stored as 32-bit floats (PFM); rounding them
// before rendering keeps the on-disk record exactly self-consistent with
// its observations.
ImageF round_to_float32(const ImageF& img) {
  ImageF out(img.width(), img.height(), img.channels());
  const std::size_t n = img.sample_count();
  for (std::size_t i = 0; i < n; ++i) {
    out.data()[i] = static_cast<double>(static_cast<float>(img.data()[i]));
  }
  return out;
}

ImageF pow_samples_checked(const ImageF& img, double exponent) {
  if (exponent == 1.0) return img;
  ImageF out(img.width(), img.height(), img.channels());
  const std::size_t n = img.sample_count();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = img.data()[i];
    if (s < 0.0) throw InvalidInputError("dynamic_range: negative sample");
    out.data()[i] = std::pow(s, exponent);
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  if (!(beta_max >= 1.0)) throw ConfigError("synth: beta_max must be >= 1");
  if (!(gamma_exponent > 0.0)) throw ConfigError("synth: gamma_exponent must be > 0");
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError(std::string("synth: ") + name + " must lie in [0,1]");
    }
  };
  prob(mask_probability, "mask_probability");
  prob(nrd_probability, "nrd_probability");
  prob(geometry.flat_probability, "geometry.flat_probability");
  if (!(nrd_sigma_max >= 0.0)) throw ConfigError("synth: nrd_sigma_max must be >= 0");
  if (nrd_grid_spacing < 2) throw ConfigError("synth: nrd_grid_spacing must be >= 2");
  if (!(angle_noise_deg >= 0.0)) throw ConfigError("synth: angle_noise_deg must be >= 0");
  if (patch_size < 16) throw ConfigError("synth: patch_size must be >= 16");
  if (quantize_bits != 0 && quantize_bits != 8 && quantize_bits != 16) {
    throw ConfigError("synth: quantize_bits must be 0, 8, or 16");
  }
  try {
    validate_optics(optics);
  } catch (const InvalidInputError& e) {
    throw ConfigError(e.what());
  }
  auto theta_ok = [](double t) { return t >= 0.0 && t < kPi / 2.0; };
  if (!(uniform_theta_range[0] <= uniform_theta_range[1]) ||
      !theta_ok(uniform_theta_range[0]) || !theta_ok(uniform_theta_range[1])) {
    throw ConfigError("synth: uniform_theta_range must lie in [0, pi/2)");
  }
  if (fixed_theta && !theta_ok(*fixed_theta)) {
    throw ConfigError("synth: fixed_theta must lie in [0, pi/2)");
  }
  if (!(geometry.max_retries > 0)) throw ConfigError("synth: max_retries must be > 0");
  if (!(geometry.curvature[0] > 0.0) ||
      !(geometry.curvature[1] >= geometry.curvature[0])) {
    throw ConfigError("synth: curvature interval must be positive and ordered");
  }
}

std::pair<ImageF, ImageF> dynamic_range(const ImageF& i_r, const ImageF& i_t,
                                        double beta, double gamma_exponent) {
  require_nonempty(i_r, "dynamic_range");
  require_nonempty(i_t, "dynamic_range");
  if (!(beta >= 1.0)) throw InvalidInputError("dynamic_range: beta must be >= 1");
  if (!(gamma_exponent > 0.0)) {
    throw InvalidInputError("dynamic_range: gamma exponent must be positive");
  }
  ImageF lin_r = pow_samples_checked(i_r, gamma_exponent);
  ImageF lin_t = pow_samples_checked(i_t, gamma_exponent);
  if (beta == 1.0) return {std::move(lin_r), std::move(lin_t)};
  return {scale_samples(lin_r, beta), scale_samples(lin_t, 1.0 / beta)};
}

ImageF threshold_mask(const ImageF& layer, const ImageF& other) {
  require_nonempty(layer, "threshold_mask");
  require_same_shape(layer, other, "threshold_mask");

  const std::size_t n = layer.sample_count();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += layer.data()[i] + other.data()[i];
  const double threshold = sum / static_cast<double>(n);

  ImageF out(layer.width(), layer.height(), layer.channels());
  const int c = layer.channels();
  const std::size_t pixels = layer.pixel_count();
  for (std::size_t p = 0; p < pixels; ++p) {
    const double* src = layer.data() + p * c;
    double mean = 0.0;
    for (int ch = 0; ch < c; ++ch) mean += src[ch];
    mean /= c;
    double* dst = out.data() + p * c;
    if (mean >= threshold) {
      for (int ch = 0; ch < c; ++ch) dst[ch] = src[ch];
    }  // else stays zero
  }
  return out;
}

std::pair<int, int> warp_grid_dims(int width, int height, int grid_spacing) {
  if (grid_spacing < 2) {
    throw InvalidInputError("nonrigid_warp: grid spacing must be >= 2");
  }
  const int nx = std::max(2, (width - 2 + grid_spacing) / grid_spacing + 1);
  const int ny = std::max(2, (height - 2 + grid_spacing) / grid_spacing + 1);
  return {nx, ny};
}

ImageF warp_with_anchor_displacements(const ImageF& img, int grid_spacing,
                                      const std::vector<double>& dx,
                                      const std::vector<double>& dy) {
  require_nonempty(img, "nonrigid_warp");
  const auto [nx, ny] = warp_grid_dims(img.width(), img.height(), grid_spacing);
  if (dx.size() != static_cast<std::size_t>(nx) * ny || dy.size() != dx.size()) {
    throw InvalidInputError("nonrigid_warp: anchor displacement size mismatch");
  }

  const int width = img.width();
  const int height = img.height();
  const int channels = img.channels();
  const double g = static_cast<double>(grid_spacing);

  ImageF out(width, height, channels);
  const std::size_t row = static_cast<std::size_t>(width) * channels;
  std::vector<std::int32_t> i00(row), i01(row), i10(row), i11(row);
  std::vector<double> w00(row), w01(row), w10(row), w11(row);
  const auto& kern = kernels::active();

  for (int y = 0; y < height; ++y) {
    const double gy = y / g;
    int cy = std::min(static_cast<int>(gy), ny - 2);
    const double v = gy - cy;
    for (int x = 0; x < width; ++x) {
      const double gx = x / g;
      int cx = std::min(static_cast<int>(gx), nx - 2);
      const double u = gx - cx;

      // displacement: bilinear between the four surrounding anchors
      const std::size_t a = static_cast<std::size_t>(cy) * nx + cx;
      const double ddx = (1.0 - v) * ((1.0 - u) * dx[a] + u * dx[a + 1]) +
                         v * ((1.0 - u) * dx[a + nx] + u * dx[a + nx + 1]);
      const double ddy = (1.0 - v) * ((1.0 - u) * dy[a] + u * dy[a + 1]) +
                         v * ((1.0 - u) * dy[a + nx] + u * dy[a + nx + 1]);

      // backward sampling with edge clamping
      double sx = x + ddx;
      double sy = y + ddy;
      sx = std::min(std::max(sx, 0.0), static_cast<double>(width - 1));
      sy = std::min(std::max(sy, 0.0), static_cast<double>(height - 1));
      const int x0 = static_cast<int>(sx);
      const int y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, width - 1);
      const int y1 = std::min(y0 + 1, height - 1);
      const double fx = sx - x0;
      const double fy = sy - y0;

      const double wx0 = 1.0 - fx;
      const double wy0 = 1.0 - fy;
      const std::size_t col = static_cast<std::size_t>(x) * channels;
      for (int ch = 0; ch < channels; ++ch) {
        const std::size_t i = col + ch;
        i00[i] = static_cast<std::int32_t>((static_cast<std::size_t>(y0) * width + x0) * channels + ch);
        i01[i] = static_cast<std::int32_t>((static_cast<std::size_t>(y0) * width + x1) * channels + ch);
        i10[i] = static_cast<std::int32_t>((static_cast<std::size_t>(y1) * width + x0) * channels + ch);
        i11[i] = static_cast<std::int32_t>((static_cast<std::size_t>(y1) * width + x1) * channels + ch);
        w00[i] = wx0 * wy0;
        w01[i] = fx * wy0;
        w10[i] = wx0 * fy;
        w11[i] = fx * fy;
      }
    }
    kern.bilinear_gather(img.data(), i00.data(), i01.data(), i10.data(),
                         i11.data(), w00.data(), w01.data(), w10.data(),
                         w11.data(), out.data() + static_cast<std::size_t>(y) * row,
                         row);
  }
  return out;
}

ImageF nonrigid_warp(const ImageF& img, int grid_spacing, double sigma,
                     Rng& rng) {
  require_nonempty(img, "nonrigid_warp");
  if (!(sigma >= 0.0)) throw InvalidInputError("nonrigid_warp: sigma must be >= 0");
  const auto [nx, ny] = warp_grid_dims(img.width(), img.height(), grid_spacing);
  std::vector<double> dx(static_cast<std::size_t>(nx) * ny, 0.0);
  std::vector<double> dy(dx.size());
  const double clamp = 3.0 * sigma;
  for (std::size_t a = 0; a < dx.size(); ++a) {
    dx[a] = std::min(std::max(rng.normal(0.0, sigma), -clamp), clamp);
    dy[a] = std::min(std::max(rng.normal(0.0, sigma), -clamp), clamp);
  }
  return warp_with_anchor_displacements(img, grid_spacing, dx, dy);
}

std::array<double, 3> perturb_angles(double phi0, double noise_deg, Rng& rng) {
  if (!(noise_deg >= 0.0)) {
    throw InvalidInputError("perturb_angles: noise must be >= 0");
  }
  const double bound = noise_deg * kDegToRad;
  std::array<double, 3> angles{};
  for (int i = 0; i < 3; ++i) {
    const double noise = (bound > 0.0) ? rng.uniform(-bound, bound) : 0.0;
    angles[i] = phi0 + i * kQuarterPi + noise;
  }
  return angles;
}

SampleRecord synthesize_sample(const ImageF& src_r, const ImageF& src_t,
                               const SynthConfig& cfg, std::uint64_t seed,
                               const std::string& source_r_id,
                               const std::string& source_t_id) {
  cfg.validate();
  require_nonempty(src_r, "synthesize_sample");
  require_nonempty(src_t, "synthesize_sample");
  if (src_r.channels() != src_t.channels()) {
    throw InvalidInputError("synthesize_sample: source channel counts differ");
  }
  const int patch = cfg.patch_size;
  if (src_r.width() < patch || src_r.height() < patch ||
      src_t.width() < patch || src_t.height() < patch) {
    throw InvalidInputError("synthesize_sample: sources smaller than patch size");
  }

  const Rng root(seed);
  SampleRecord rec;
  Provenance& prov = rec.provenance;
  prov.seed = seed;
  prov.patch_size = patch;
  prov.source_reflection = source_r_id;
  prov.source_transmission = source_t_id;
  prov.stages = cfg.stages;
  prov.warp_both_layers = cfg.warp_both_layers;
  prov.angle_noise_deg = cfg.angle_noise_deg;
  prov.quantize_bits = cfg.quantize_bits;
  prov.optics = cfg.optics;
  prov.nrd_grid_spacing = cfg.nrd_grid_spacing;

  // --- random patch crop ---
  Rng rc = root.fork(kStreamCrop);
  const int rx = static_cast<int>(rc.uniform_below(src_r.width() - patch + 1));
  const int ry = static_cast<int>(rc.uniform_below(src_r.height() - patch + 1));
  const int tx = static_cast<int>(rc.uniform_below(src_t.width() - patch + 1));
  const int ty = static_cast<int>(rc.uniform_below(src_t.height() - patch + 1));
  prov.crop_reflection = {rx, ry};
  prov.crop_transmission = {tx, ty};
  ImageF layer_r = crop(src_r, rx, ry, patch, patch);
  ImageF layer_t = crop(src_t, tx, ty, patch, patch);

  // --- dynamic-range manipulation ---
  Rng rd = root.fork(kStreamDr);
  prov.dr_applied = cfg.stages.dr;
  if (cfg.stages.dr) {
    prov.beta = cfg.fixed_beta ? *cfg.fixed_beta : rd.uniform(1.0, cfg.beta_max);
    prov.gamma_exponent = cfg.gamma_exponent;
    std::tie(layer_r, layer_t) =
        dynamic_range(layer_r, layer_t, prov.beta, prov.gamma_exponent);
  }

  // --- localized-reflection masking ---
  Rng rm = root.fork(kStreamMask);
  prov.mask_applied = cfg.stages.dr && rm.bernoulli(cfg.mask_probability);
  if (prov.mask_applied) {
    if (rm.bernoulli(0.5)) {
      layer_r = threshold_mask(layer_r, layer_t);
      prov.masked_layer = "reflection";
    } else {
      layer_t = threshold_mask(layer_t, layer_r);
      prov.masked_layer = "transmission";
    }
  }

  // --- observable ground truth (what a sensor can record); observations
  // are rendered from these so that re-rendering from the stored record
  // reproduces the stack exactly ---
  rec.gt_reflection = round_to_float32(clip01(layer_r));
  rec.gt_transmission = round_to_float32(clip01(layer_t));

  // --- non-rigid deformation, independently per observation ---
  Rng rn = root.fork(kStreamNrd);
  prov.nrd_applied = cfg.stages.nrd && rn.bernoulli(cfg.nrd_probability);
  std::array<const ImageF*, 3> obs_r{&rec.gt_reflection, &rec.gt_reflection,
                                     &rec.gt_reflection};
  std::array<const ImageF*, 3> obs_t{&rec.gt_transmission, &rec.gt_transmission,
                                     &rec.gt_transmission};
  std::array<ImageF, 3> warped_r;
  std::array<ImageF, 3> warped_t;
  if (prov.nrd_applied) {
    prov.nrd_sigma = rn.uniform(0.0, cfg.nrd_sigma_max);
    for (int i = 0; i < 3; ++i) {
      Rng rw = rn.fork(10 + i);
      warped_r[i] = nonrigid_warp(rec.gt_reflection, cfg.nrd_grid_spacing,
                                  prov.nrd_sigma, rw);
      obs_r[i] = &warped_r[i];
      if (cfg.warp_both_layers) {
        Rng rw2 = rn.fork(20 + i);
        warped_t[i] = nonrigid_warp(rec.gt_transmission, cfg.nrd_grid_spacing,
                                    prov.nrd_sigma, rw2);
        obs_t[i] = &warped_t[i];
      }
    }
  }

  // --- angle-of-incidence field ---
  Rng rg = root.fork(kStreamGeometry);
  if (cfg.fixed_theta) {
    prov.uniform_aoi = true;
    prov.uniform_theta = *cfg.fixed_theta;
    rec.aoi = AoiField::uniform(patch, prov.uniform_theta);
  } else if (cfg.stages.lcg) {
    prov.uniform_aoi = false;
    for (int attempt = 0;; ++attempt) {
      SurfaceGeometry g = sample_surface(rg, cfg.geometry);
      try {
        rec.aoi = aoi_field(g, patch);
        prov.geometry = g;
        break;
      } catch (const InvalidInputError&) {
        if (attempt + 1 >= cfg.geometry.max_retries) {
          throw ConfigError("synthesize_sample: no valid geometry for patch");
        }
      }
    }
  } else {
    prov.uniform_aoi = true;
    prov.uniform_theta =
        rg.uniform(cfg.uniform_theta_range[0], cfg.uniform_theta_range[1]);
    rec.aoi = AoiField::uniform(patch, prov.uniform_theta);
  }

  // --- canonical direction and polarizer angles ---
  Rng rp = root.fork(kStreamPhi);
  rec.phi_perp = cfg.fixed_phi_perp ? *cfg.fixed_phi_perp
                                    : rp.uniform(-kQuarterPi, kQuarterPi);
  prov.phi_perp = rec.phi_perp;
  prov.phi0 = cfg.fixed_phi0 ? *cfg.fixed_phi0 : rp.uniform(0.0, kPi);

  Rng ra = root.fork(kStreamAngles);
  prov.angles = perturb_angles(prov.phi0, cfg.angle_noise_deg, ra);

  // --- render and quantize the observations ---
  rec.stack.nominal_phi0 = prov.phi0;
  rec.stack.angles = prov.angles;
  for (int i = 0; i < 3; ++i) {
    ImageF obs = observe(*obs_r[i], *obs_t[i], rec.aoi, rec.phi_perp,
                         prov.angles[i], cfg.optics);
    rec.stack.images[i] = (cfg.quantize_bits > 0)
                              ? clip_quantize(obs, cfg.quantize_bits)
                              : std::move(obs);
  }
  return rec;
}

}  // namespace polarsep
