#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace polarsep {

// Planar multi-channel raster in linear light: row-major, channels
// interleaved, double samples. Nominal display range is [0,1]; values above
// 1 are legal before clipping. Immutable by convention once built — every
// operation in this library returns a new image.
class ImageF {
 public:
  ImageF() = default;
  // Zero-filled image. channels must be 1 or 3.
  ImageF(int width, int height, int channels);
  // Takes ownership of samples; size must equal width*height*channels.
  ImageF(int width, int height, int channels, std::vector<double> samples);

  static ImageF constant(int width, int height, int channels, double value);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return samples_.empty(); }

  std::size_t sample_count() const { return samples_.size(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  double& at(int x, int y, int c) { return samples_[index(x, y, c)]; }
  double at(int x, int y, int c) const { return samples_[index(x, y, c)]; }

  double* data() { return samples_.data(); }
  const double* data() const { return samples_.data(); }
  std::span<double> samples() { return samples_; }
  std::span<const double> samples() const { return samples_; }

  bool same_shape(const ImageF& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }
  bool all_finite() const;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> samples_;
};

// Throws InvalidInputError naming `op` when shapes differ.
void require_same_shape(const ImageF& a, const ImageF& b, const char* op);
// Throws InvalidInputError when the image is empty.
void require_nonempty(const ImageF& img, const char* op);

// Axis-aligned crop; the window must lie inside the image.
ImageF crop(const ImageF& img, int x0, int y0, int width, int height);

}  // namespace polarsep
