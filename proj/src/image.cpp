#include "polarsep/image.hpp"

#include <cmath>
#include <string>

#include "polarsep/errors.hpp"

namespace polarsep {
namespace {

void validate_dims(int width, int height, int channels) {
  if (width <= 0 || height <= 0) {
    throw InvalidInputError("image dimensions must be positive");
  }
  if (channels != 1 && channels != 3) {
    throw InvalidInputError("image channel count must be 1 or 3");
  }
}

}  // namespace

ImageF::ImageF(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  validate_dims(width, height, channels);
  samples_.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
}

ImageF::ImageF(int width, int height, int channels, std::vector<double> samples)
    : width_(width), height_(height), channels_(channels),
      samples_(std::move(samples)) {
  validate_dims(width, height, channels);
  const std::size_t expected =
      static_cast<std::size_t>(width) * height * channels;
  if (samples_.size() != expected) {
    throw InvalidInputError("sample buffer size does not match dimensions");
  }
}

ImageF ImageF::constant(int width, int height, int channels, double value) {
  ImageF img(width, height, channels);
  for (double& s : img.samples_) s = value;
  return img;
}

bool ImageF::all_finite() const {
  for (double s : samples_) {
    if (!std::isfinite(s)) return false;
  }
  return true;
}

void require_same_shape(const ImageF& a, const ImageF& b, const char* op) {
  if (!a.same_shape(b)) {
    throw InvalidInputError(std::string(op) + ": image shapes differ");
  }
}

void require_nonempty(const ImageF& img, const char* op) {
  if (img.empty()) {
    throw InvalidInputError(std::string(op) + ": empty image");
  }
}

ImageF crop(const ImageF& img, int x0, int y0, int width, int height) {
  require_nonempty(img, "crop");
  if (x0 < 0 || y0 < 0 || width <= 0 || height <= 0 ||
      x0 + width > img.width() || y0 + height > img.height()) {
    throw InvalidInputError("crop: window outside image bounds");
  }
  ImageF out(width, height, img.channels());
  const int c = img.channels();
  for (int y = 0; y < height; ++y) {
    const double* src = img.data() +
        (static_cast<std::size_t>(y0 + y) * img.width() + x0) * c;
    double* dst = out.data() + static_cast<std::size_t>(y) * width * c;
    for (int i = 0; i < width * c; ++i) dst[i] = src[i];
  }
  return out;
}

}  // namespace polarsep
