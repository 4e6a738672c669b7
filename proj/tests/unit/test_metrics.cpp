#include "doctest.h"

#include <cmath>

#include "polarsep/errors.hpp"
#include "polarsep/metrics.hpp"
#include "polarsep/rng.hpp"

using namespace polarsep;

namespace {

ImageF random_image(Rng& rng, int w, int h, int c) {
  ImageF img(w, h, c);
  for (double& s : img.samples()) s = rng.uniform();
  return img;
}

}  // namespace

TEST_CASE("rmse matches hand-derived cases") {
  Rng rng(21);
  const ImageF x = random_image(rng, 6, 5, 3);
  CHECK(rmse(x, x) == 0.0);

  const ImageF a = ImageF::constant(4, 4, 3, 0.0);
  const ImageF b = ImageF::constant(4, 4, 3, 0.1);
  CHECK(rmse(a, b) == doctest::Approx(0.1).epsilon(1e-12));

  // Direct evaluation: mean((0-1)^2, (1-0)^2) = 1.
  ImageF u(2, 1, 1, {0.0, 1.0});
  ImageF v(2, 1, 1, {1.0, 0.0});
  CHECK(rmse(u, v) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(rmse(x, ImageF(3, 3, 3)), InvalidInputError);
}

TEST_CASE("psnr matches hand-derived cases and caps at identity") {
  ImageF a = ImageF::constant(8, 8, 1, 0.0);
  ImageF b = ImageF::constant(8, 8, 1, 0.1);
  CHECK(psnr(a, b, 1.0) == doctest::Approx(20.0).epsilon(1e-12));

  // -20*log10(0.064) = 23.8764...; a per-image-averaged dataset mean differs
  // because it averages per-image values.
  CHECK(psnr_from_rmse(0.064) == doctest::Approx(23.8764005203).epsilon(1e-9));

  ImageF x = ImageF::constant(4, 4, 3, 0.5);
  CHECK(psnr(x, x) == kPsnrCapDb);

  CHECK_THROWS_AS(psnr(a, b, 0.0), InvalidInputError);
}

TEST_CASE("rmse behaves as a metric on random triples") {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const ImageF a = random_image(rng, 7, 5, 3);
    const ImageF b = random_image(rng, 7, 5, 3);
    const ImageF c = random_image(rng, 7, 5, 3);
    const double ab = rmse(a, b);
    const double ba = rmse(b, a);
    const double ac = rmse(a, c);
    const double cb = rmse(c, b);
    CHECK(ab == ba);           // symmetry
    CHECK(ab >= 0.0);          // non-negativity
    CHECK(ab <= ac + cb + 1e-12);  // triangle inequality
  }
  const ImageF a = random_image(rng, 7, 5, 3);
  CHECK(rmse(a, a) == 0.0);  // zero iff equal (identity direction)
}

TEST_CASE("psnr strictly decreases as rmse increases") {
  Rng rng(23);
  double prev_rmse = 0.0;
  double prev_psnr = kPsnrCapDb + 1.0;
  for (int i = 0; i < 100; ++i) {
    const double r = prev_rmse + rng.uniform(1e-6, 0.05);
    const double p = psnr_from_rmse(r);
    CHECK(p < prev_psnr);
    prev_rmse = r;
    prev_psnr = p;
  }
}

TEST_CASE("report means average per-image values, not pooled rmse") {
  // Two images whose rmse values average to 0.064: the mean psnr must be the
  // mean of the per-image psnr values, not -20*log10(0.064).
  std::vector<MetricReport::Entry> entries;
  entries.push_back({"000000", 0.1, psnr_from_rmse(0.1)});
  entries.push_back({"000001", 0.028, psnr_from_rmse(0.028)});
  const MetricReport report = make_report(std::move(entries));
  CHECK(report.mean_rmse == doctest::Approx(0.064).epsilon(1e-12));
  const double expected_mean_psnr =
      0.5 * (psnr_from_rmse(0.1) + psnr_from_rmse(0.028));
  CHECK(report.mean_psnr == doctest::Approx(expected_mean_psnr).epsilon(1e-12));
  CHECK(report.mean_psnr != doctest::Approx(psnr_from_rmse(0.064)).epsilon(1e-3));
}
