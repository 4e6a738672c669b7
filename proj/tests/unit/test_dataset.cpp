#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "polarsep/dataset.hpp"
#include "polarsep/errors.hpp"
#include "polarsep/image_io.hpp"
#include "polarsep/imageops.hpp"
#include "polarsep/optics.hpp"
#include "polarsep/rng.hpp"

using namespace polarsep;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ImageF random_image(Rng& rng, int w, int h, int c) {
  ImageF img(w, h, c);
  for (double& s : img.samples()) s = rng.uniform();
  return img;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("polarsep_ds_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SampleRecord make_record(std::uint64_t seed, SynthConfig cfg = {}) {
  Rng rng(seed + 99);
  cfg.patch_size = 32;
  const ImageF src_r = random_image(rng, 48, 48, 3);
  const ImageF src_t = random_image(rng, 48, 48, 3);
  return synthesize_sample(src_r, src_t, cfg, seed, "r.png", "t.png");
}

}  // namespace

TEST_CASE("provenance serialization round-trips losslessly") {
  const SampleRecord rec = make_record(4242);
  const json j = provenance_to_json(rec.provenance);
  const Provenance back = provenance_from_json(j);
  CHECK(provenance_to_json(back) == j);  // canonical form is a fixed point
  CHECK(back.seed == rec.provenance.seed);
  CHECK(back.beta == rec.provenance.beta);
  CHECK(back.phi_perp == rec.provenance.phi_perp);
  CHECK(back.angles == rec.provenance.angles);
  CHECK(back.uniform_aoi == rec.provenance.uniform_aoi);
  if (!back.uniform_aoi) {
    CHECK(back.geometry.camera == rec.provenance.geometry.camera);
    CHECK(back.geometry.curvature == rec.provenance.geometry.curvature);
  }
}

TEST_CASE("meta parsing is schema-strict") {
  const SampleRecord rec = make_record(7);
  json j = provenance_to_json(rec.provenance);
  j["surprise"] = 1;
  CHECK_THROWS_AS(provenance_from_json(j), ConfigError);
  json missing = provenance_to_json(rec.provenance);
  missing.erase("beta");
  CHECK_THROWS_AS(provenance_from_json(missing), ConfigError);
}

TEST_CASE("sample write/read round trip reproduces the record") {
  const fs::path dir = fresh_dir("roundtrip");
  const SampleRecord rec = make_record(123);
  write_sample(dir, rec);
  const SampleRecord back = read_sample(dir);

  for (int i = 0; i < 3; ++i) {
    REQUIRE(back.stack.images[i].same_shape(rec.stack.images[i]));
    CHECK(std::equal(back.stack.images[i].data(),
                     back.stack.images[i].data() + back.stack.images[i].sample_count(),
                     rec.stack.images[i].data()));
    CHECK(back.stack.angles[i] == rec.stack.angles[i]);
  }
  // Ground truth is held at float32 precision, so the PFM trip is exact.
  CHECK(std::equal(back.gt_reflection.data(),
                   back.gt_reflection.data() + back.gt_reflection.sample_count(),
                   rec.gt_reflection.data()));
  CHECK(std::equal(back.gt_transmission.data(),
                   back.gt_transmission.data() + back.gt_transmission.sample_count(),
                   rec.gt_transmission.data()));
  CHECK(back.phi_perp == rec.phi_perp);
  CHECK(back.aoi.thetas() == rec.aoi.thetas());
}

TEST_CASE("records read back from disk re-render their own stack exactly") {
  // The ground truth is held at float32 precision and the observations are
  // 8-bit PNGs, so the oracle holds bit-exactly from disk, not just in
  // memory (NRD off).
  const fs::path dir = fresh_dir("oracle");
  SynthConfig cfg;
  cfg.stages.nrd = false;
  const SampleRecord written = make_record(2024, cfg);
  write_sample(dir, written);
  const SampleRecord rec = read_sample(dir);
  for (int i = 0; i < 3; ++i) {
    const ImageF re = clip_quantize(
        observe(rec.gt_reflection, rec.gt_transmission, rec.aoi, rec.phi_perp,
                rec.stack.angles[i], rec.provenance.optics),
        rec.provenance.quantize_bits);
    CHECK(std::equal(re.data(), re.data() + re.sample_count(),
                     rec.stack.images[i].data()));
  }
}

TEST_CASE("config hash changes iff an effective parameter changes") {
  const SynthConfig base;
  const std::string h0 = config_hash(base);
  CHECK(config_hash(SynthConfig{}) == h0);  // equal configs, equal hash

  int changed = 0;
  auto expect_changed = [&](SynthConfig cfg) {
    CHECK(config_hash(cfg) != h0);
    ++changed;
  };
  {
    SynthConfig c;
    c.beta_max = 2.9;
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.gamma_exponent = 2.0;
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.mask_probability = 0.31;
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.nrd_probability = 0.51;
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.nrd_sigma_max = 5.0;
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.nrd_grid_spacing = 17;
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.angle_noise_deg = 3.0;
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.patch_size = 64;
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.quantize_bits = 16;
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.stages.nrd = false;
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.optics.n2 = 1.52;
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.geometry.flat_probability = 0.4;
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.uniform_theta_range = {0.2, 1.4};
    expect_changed(c);
  }
  {
    SynthConfig c;
    c.fixed_theta = 0.9;
    expect_changed(c);
  }
  CHECK(changed == 14);
}

TEST_CASE("synth config json is schema-strict and round-trips") {
  SynthConfig cfg;
  cfg.beta_max = 2.5;
  cfg.stages.lcg = false;
  cfg.fixed_phi_perp = 0.1;
  const json j = synth_config_to_json(cfg);
  const SynthConfig back = synth_config_from_json(j);
  CHECK(config_hash(back) == config_hash(cfg));

  json bad = j;
  bad["not_a_key"] = true;
  CHECK_THROWS_AS(synth_config_from_json(bad), ConfigError);
  json bad_value = j;
  bad_value["beta_max"] = 0.2;
  CHECK_THROWS_AS(synth_config_from_json(bad_value), ConfigError);
  json no_schema = j;
  no_schema.erase("schema");
  CHECK_THROWS_AS(synth_config_from_json(no_schema), ConfigError);
}

TEST_CASE("generate_dataset produces a valid, self-consistent tree") {
  Rng rng(991);
  const fs::path src_dir = fresh_dir("sources");
  save_png(src_dir / "a.png", random_image(rng, 64, 64, 3));
  save_png(src_dir / "b.png", random_image(rng, 64, 64, 3));
  save_png(src_dir / "c.png", random_image(rng, 64, 64, 3));

  const fs::path out = fresh_dir("tree");
  SynthConfig cfg;
  cfg.patch_size = 32;
  const DatasetManifest manifest = generate_dataset(
      out, {src_dir / "a.png", src_dir / "b.png", src_dir / "c.png"}, 6, cfg,
      777, 2);
  CHECK(manifest.samples.size() == 6);
  CHECK(fs::exists(out / "manifest.json"));
  const DatasetManifest back = read_manifest(out / "manifest.json");
  CHECK(back.master_seed == 777);
  CHECK(back.config_hash == config_hash(cfg));
  CHECK(back.samples == manifest.samples);

  for (const std::string& id : manifest.samples) {
    const SampleRecord rec = read_sample(out / id);
    CHECK(rec.provenance.seed == mix64(777, std::stoull(id)));
    CHECK((rec.provenance.source_reflection != rec.provenance.source_transmission));
  }

  // count = 0: empty manifest, success.
  const fs::path empty_out = fresh_dir("empty");
  const DatasetManifest empty = generate_dataset(
      empty_out, {src_dir / "a.png", src_dir / "b.png"}, 0, cfg, 1, 1);
  CHECK(empty.samples.empty());
  CHECK(fs::exists(empty_out / "manifest.json"));
}

TEST_CASE("generate_dataset validates sources up front") {
  const fs::path out = fresh_dir("invalid");
  SynthConfig cfg;
  CHECK_THROWS_AS(generate_dataset(out, {}, 1, cfg, 0, 1), InvalidInputError);
  CHECK_THROWS_AS(
      generate_dataset(out, {out / "nope1.png", out / "nope2.png"}, 1, cfg, 0, 1),
      IoError);
}
