#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "polarsep/errors.hpp"
#include "polarsep/image.hpp"
#include "polarsep/image_io.hpp"
#include "polarsep/rng.hpp"

using namespace polarsep;
namespace fs = std::filesystem;

namespace {

ImageF random_image(Rng& rng, int w, int h, int c, double lo = 0.0,
                    double hi = 1.0) {
  ImageF img(w, h, c);
  for (double& s : img.samples()) s = rng.uniform(lo, hi);
  return img;
}

fs::path test_dir() {
  const fs::path dir = fs::temp_directory_path() / "polarsep_image_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("image construction enforces shape invariants") {
  CHECK_THROWS_AS(ImageF(0, 4, 3), InvalidInputError);
  CHECK_THROWS_AS(ImageF(4, 4, 2), InvalidInputError);
  CHECK_THROWS_AS(ImageF(2, 2, 1, std::vector<double>(3, 0.0)), InvalidInputError);

  ImageF img(5, 4, 3);
  CHECK(img.sample_count() == 60);
  CHECK(img.pixel_count() == 20);
  img.at(4, 3, 2) = 1.5;
  CHECK(img.at(4, 3, 2) == 1.5);
  CHECK(img.all_finite());
}

TEST_CASE("crop extracts the expected window and validates bounds") {
  ImageF img(4, 3, 1);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) img.at(x, y, 0) = y * 10 + x;
  const ImageF sub = crop(img, 1, 1, 2, 2);
  CHECK(sub.at(0, 0, 0) == 11);
  CHECK(sub.at(1, 1, 0) == 22);
  CHECK_THROWS_AS(crop(img, 3, 0, 2, 2), InvalidInputError);
  CHECK_THROWS_AS(crop(img, -1, 0, 2, 2), InvalidInputError);
}

TEST_CASE("pfm round trip preserves float32 samples, both channel counts") {
  Rng rng(11);
  const fs::path dir = test_dir();
  for (int channels : {1, 3}) {
    ImageF img = random_image(rng, 9, 7, channels, -2.0, 2.0);
    // Values representable in float32 round-trip exactly.
    for (double& s : img.samples()) s = static_cast<float>(s);
    const fs::path path = dir / ("roundtrip_" + std::to_string(channels) + ".pfm");
    save_pfm(path, img);
    const ImageF back = load_pfm(path);
    REQUIRE(back.same_shape(img));
    CHECK(std::equal(img.data(), img.data() + img.sample_count(), back.data()));
  }
}

TEST_CASE("png round trip is exact for quantized values") {
  Rng rng(12);
  const fs::path dir = test_dir();
  for (int bits : {8, 16}) {
    const double levels = bits == 8 ? 255.0 : 65535.0;
    ImageF img = random_image(rng, 8, 6, 3);
    for (double& s : img.samples()) s = std::nearbyint(s * levels) / levels;
    const fs::path path = dir / ("roundtrip_" + std::to_string(bits) + ".png");
    save_png(path, img, bits);
    const ImageF back = load_png(path);
    REQUIRE(back.same_shape(img));
    CHECK(std::equal(img.data(), img.data() + img.sample_count(), back.data()));
  }
}

TEST_CASE("png writer clips out-of-range samples") {
  ImageF img(2, 1, 1);
  img.at(0, 0, 0) = 1.7;
  img.at(1, 0, 0) = -0.3;
  const fs::path path = test_dir() / "clip.png";
  save_png(path, img);
  const ImageF back = load_png(path);
  CHECK(back.at(0, 0, 0) == 1.0);
  CHECK(back.at(1, 0, 0) == 0.0);
}

TEST_CASE("image io rejects missing files and bad formats") {
  CHECK_THROWS_AS(load_png(test_dir() / "does_not_exist.png"), IoError);
  CHECK_THROWS_AS(load_pfm(test_dir() / "does_not_exist.pfm"), IoError);
  CHECK_THROWS_AS(load_image(test_dir() / "file.bmp"), IoError);
  CHECK_THROWS_AS(save_png(test_dir() / "bad.png", ImageF(1, 1, 1), 12),
                  InvalidInputError);
}
