#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "polarsep/errors.hpp"
#include "polarsep/imageops.hpp"
#include "polarsep/metrics.hpp"
#include "polarsep/optics.hpp"
#include "polarsep/rng.hpp"
#include "polarsep/synth.hpp"

using namespace polarsep;

namespace {

constexpr double kPi = 3.14159265358979323846;

ImageF random_image(Rng& rng, int w, int h, int c) {
  ImageF img(w, h, c);
  for (double& s : img.samples()) s = rng.uniform();
  return img;
}

bool images_equal(const ImageF& a, const ImageF& b) {
  return a.same_shape(b) &&
         std::equal(a.data(), a.data() + a.sample_count(), b.data());
}

SynthConfig quiet_config() {
  SynthConfig cfg;
  cfg.stages = {false, false, false};
  cfg.angle_noise_deg = 0.0;
  cfg.patch_size = 32;
  return cfg;
}

}  // namespace

TEST_CASE("dynamic_range matches hand-derived cases") {
  const ImageF half = ImageF::constant(2, 2, 1, 0.5);

  // beta = 1, exponent 1: identity on both.
  auto [r1, t1] = dynamic_range(half, half, 1.0, 1.0);
  CHECK(images_equal(r1, half));
  CHECK(images_equal(t1, half));

  // s = 0.5, exponent 2.2, beta = 2: boosted sample 2*0.5^2.2.
  auto [r2, t2] = dynamic_range(half, half, 2.0, 2.2);
  CHECK(r2.at(0, 0, 0) == doctest::Approx(0.435275281648062).epsilon(1e-12));
  CHECK(t2.at(0, 0, 0) == doctest::Approx(0.217637640824031 / 2.0).epsilon(1e-12));

  CHECK_THROWS_AS(dynamic_range(half, half, 0.99, 2.2), InvalidInputError);
}

TEST_CASE("dynamic_range product is independent of beta") {
  Rng rng(51);
  const ImageF i_r = random_image(rng, 8, 8, 3);
  const ImageF i_t = random_image(rng, 8, 8, 3);
  auto [ra, ta] = dynamic_range(i_r, i_t, 1.0, 2.2);
  auto [rb, tb] = dynamic_range(i_r, i_t, 2.5, 2.2);
  for (std::size_t i = 0; i < ra.sample_count(); ++i) {
    const double pa = ra.data()[i] * ta.data()[i];
    const double pb = rb.data()[i] * tb.data()[i];
    CHECK(pa == doctest::Approx(pb).epsilon(1e-12));
  }
}

TEST_CASE("threshold_mask matches hand-derived cases") {
  // Constant layers: t = 2c zeroes everything.
  const ImageF c = ImageF::constant(4, 4, 1, 0.3);
  const ImageF masked = threshold_mask(c, c);
  for (double s : masked.samples()) CHECK(s == 0.0);

  // Two-pixel worked case: t = mean(0.8, 1.6) = 1.2.
  ImageF layer(2, 1, 1, {0.2, 1.4});
  ImageF other(2, 1, 1, {0.6, 0.2});
  const ImageF m = threshold_mask(layer, other);
  CHECK(m.at(0, 0, 0) == 0.0);
  CHECK(m.at(1, 0, 0) == 1.4);

  // Zero layer stays zero.
  const ImageF zero(3, 3, 3);
  const ImageF mz = threshold_mask(zero, ImageF::constant(3, 3, 3, 0.3));
  for (double s : mz.samples()) CHECK(s == 0.0);
}

TEST_CASE("nonrigid_warp with zero sigma is a bit-exact identity") {
  Rng rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 5 + static_cast<int>(rng.uniform_below(60));
    const int h = 5 + static_cast<int>(rng.uniform_below(60));
    const ImageF img = random_image(rng, w, h, trial % 2 ? 3 : 1);
    Rng wr(trial);
    const ImageF out = nonrigid_warp(img, 16, 0.0, wr);
    CHECK(images_equal(out, img));
  }
}

TEST_CASE("uniform integer anchor displacement translates the interior") {
  Rng rng(53);
  const int w = 40, h = 30;
  const ImageF img = random_image(rng, w, h, 3);
  const auto [nx, ny] = warp_grid_dims(w, h, 8);
  // Displacement (+3, +2) everywhere: out(x, y) = img(x+3, y+2) away from
  // the clamped border band.
  std::vector<double> dx(static_cast<std::size_t>(nx) * ny, 3.0);
  std::vector<double> dy(dx.size(), 2.0);
  const ImageF out = warp_with_anchor_displacements(img, 8, dx, dy);
  for (int y = 0; y + 2 < h; ++y) {
    for (int x = 0; x + 3 < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        CHECK(out.at(x, y, c) == doctest::Approx(img.at(x + 3, y + 2, c)).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("nonrigid_warp is deterministic per seed and shrinks no range") {
  Rng rng(54);
  const ImageF img = random_image(rng, 33, 21, 3);
  Rng a(99), b(99), c(100);
  const ImageF wa = nonrigid_warp(img, 6, 2.5, a);
  const ImageF wb = nonrigid_warp(img, 6, 2.5, b);
  const ImageF wc = nonrigid_warp(img, 6, 2.5, c);
  CHECK(images_equal(wa, wb));
  CHECK_FALSE(images_equal(wa, wc));
  // Bilinear interpolation of [0,1] data stays in [0,1].
  for (double s : wa.samples()) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("perturb_angles keeps nominal spacing and the noise bound") {
  Rng zero_rng(1);
  const auto exact = perturb_angles(0.3, 0.0, zero_rng);
  CHECK(exact[0] == 0.3);
  CHECK(exact[1] == doctest::Approx(0.3 + kPi / 4.0).epsilon(1e-15));
  CHECK(exact[2] == doctest::Approx(0.3 + kPi / 2.0).epsilon(1e-15));

  Rng rng(55);
  const double bound = 4.0 * kPi / 180.0;
  for (int i = 0; i < 10000; ++i) {
    const auto angles = perturb_angles(1.1, 4.0, rng);
    for (int k = 0; k < 3; ++k) {
      const double nominal = 1.1 + k * kPi / 4.0;
      CHECK(std::abs(angles[k] - nominal) <= bound);
    }
  }

  Rng s1(42), s2(42);
  CHECK(perturb_angles(0.0, 4.0, s1) == perturb_angles(0.0, 4.0, s2));
}

TEST_CASE("synthesize_sample is bit-exact reproducible") {
  Rng rng(56);
  const ImageF src_r = random_image(rng, 64, 48, 3);
  const ImageF src_t = random_image(rng, 80, 64, 3);
  SynthConfig cfg;
  cfg.patch_size = 32;
  const SampleRecord a = synthesize_sample(src_r, src_t, cfg, 1234);
  const SampleRecord b = synthesize_sample(src_r, src_t, cfg, 1234);
  for (int i = 0; i < 3; ++i) {
    CHECK(images_equal(a.stack.images[i], b.stack.images[i]));
    CHECK(a.stack.angles[i] == b.stack.angles[i]);
  }
  CHECK(images_equal(a.gt_reflection, b.gt_reflection));
  CHECK(images_equal(a.gt_transmission, b.gt_transmission));
  CHECK(a.phi_perp == b.phi_perp);
  CHECK(a.aoi.thetas() == b.aoi.thetas());

  const SampleRecord c = synthesize_sample(src_r, src_t, cfg, 1235);
  CHECK_FALSE(images_equal(a.gt_reflection, c.gt_reflection));
}

TEST_CASE("one-term reduction: stages off, dark transmission, pinned theta") {
  Rng rng(57);
  const ImageF src_r = random_image(rng, 48, 48, 3);
  const ImageF src_t(48, 48, 3);  // zero
  SynthConfig cfg = quiet_config();
  cfg.fixed_theta = 0.9;
  cfg.fixed_phi_perp = 0.1;
  const SampleRecord rec = synthesize_sample(src_r, src_t, cfg, 99);

  for (int i = 0; i < 3; ++i) {
    const double alpha = mixing_alpha(0.9, 0.1, rec.stack.angles[i]);
    ImageF expected(cfg.patch_size, cfg.patch_size, 3);
    for (int y = 0; y < cfg.patch_size; ++y)
      for (int x = 0; x < cfg.patch_size; ++x)
        for (int c = 0; c < 3; ++c)
          expected.at(x, y, c) = alpha * rec.gt_reflection.at(x, y, c) / 2.0;
    const ImageF quantized = clip_quantize(expected, 8);
    CHECK(images_equal(rec.stack.images[i], quantized));
  }
}

TEST_CASE("self-consistency: stack re-renders from the stored record") {
  Rng rng(58);
  const ImageF src_r = random_image(rng, 96, 72, 3);
  const ImageF src_t = random_image(rng, 96, 72, 3);
  SynthConfig cfg;
  cfg.patch_size = 48;
  cfg.stages.nrd = false;  // the oracle applies when NRD was not applied
  for (std::uint64_t seed : {1ULL, 7ULL, 42ULL, 1000ULL}) {
    const SampleRecord rec = synthesize_sample(src_r, src_t, cfg, seed);
    for (int i = 0; i < 3; ++i) {
      const ImageF obs = observe(rec.gt_reflection, rec.gt_transmission, rec.aoi,
                                 rec.phi_perp, rec.stack.angles[i],
                                 cfg.optics);
      const ImageF re = clip_quantize(obs, 8);
      CHECK(images_equal(re, rec.stack.images[i]));
    }
  }
}

TEST_CASE("stage toggles draw independent streams") {
  Rng rng(59);
  const ImageF src_r = random_image(rng, 64, 64, 3);
  const ImageF src_t = random_image(rng, 64, 64, 3);
  SynthConfig with_nrd;
  with_nrd.patch_size = 32;
  SynthConfig no_nrd = with_nrd;
  no_nrd.stages.nrd = false;
  const SampleRecord a = synthesize_sample(src_r, src_t, with_nrd, 5);
  const SampleRecord b = synthesize_sample(src_r, src_t, no_nrd, 5);
  // Same crop, DR draw, geometry and angles; only the NRD stage differs.
  CHECK(a.provenance.beta == b.provenance.beta);
  CHECK(a.provenance.phi0 == b.provenance.phi0);
  CHECK(a.provenance.phi_perp == b.provenance.phi_perp);
  CHECK(a.provenance.crop_reflection == b.provenance.crop_reflection);
  CHECK(a.aoi.thetas() == b.aoi.thetas());
  CHECK(images_equal(a.gt_reflection, b.gt_reflection));
}

TEST_CASE("observations and ground truth stay inside [0,1]") {
  Rng rng(60);
  const ImageF src_r = random_image(rng, 64, 64, 3);
  const ImageF src_t = random_image(rng, 64, 64, 3);
  SynthConfig cfg;
  cfg.patch_size = 32;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SampleRecord rec = synthesize_sample(src_r, src_t, cfg, seed);
    for (const ImageF* img : {&rec.gt_reflection, &rec.gt_transmission,
                              &rec.stack.images[0], &rec.stack.images[1],
                              &rec.stack.images[2]}) {
      for (double s : img->samples()) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
      }
    }
  }
}

TEST_CASE("beta draws are uniform on [1, beta_max] at desk scale") {
  Rng rng(61);
  const ImageF src_r = random_image(rng, 40, 40, 3);
  const ImageF src_t = random_image(rng, 40, 40, 3);
  SynthConfig cfg;
  cfg.patch_size = 32;
  const int n = 2000;
  std::vector<double> betas;
  betas.reserve(n);
  for (int i = 0; i < n; ++i) {
    const SampleRecord rec = synthesize_sample(src_r, src_t, cfg, 4000 + i);
    betas.push_back(rec.provenance.beta);
  }
  std::sort(betas.begin(), betas.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    CHECK(betas[i] >= 1.0);
    CHECK(betas[i] <= cfg.beta_max);
    const double model = (betas[i] - 1.0) / (cfg.beta_max - 1.0);
    const double hi = static_cast<double>(i + 1) / n;
    const double lo = static_cast<double>(i) / n;
    ks = std::max(ks, std::max(std::abs(hi - model), std::abs(model - lo)));
  }
  // 1.95/sqrt(n): far beyond the alpha=0.001 Kolmogorov-Smirnov cutoff.
  CHECK(ks < 1.95 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("synthesize_sample rejects undersized sources and bad configs") {
  Rng rng(62);
  const ImageF small = random_image(rng, 16, 16, 3);
  SynthConfig cfg;
  cfg.patch_size = 32;
  CHECK_THROWS_AS(synthesize_sample(small, small, cfg, 0), InvalidInputError);

  SynthConfig bad;
  bad.beta_max = 0.5;
  const ImageF ok = random_image(rng, 128, 128, 3);
  CHECK_THROWS_AS(synthesize_sample(ok, ok, bad, 0), ConfigError);
}
