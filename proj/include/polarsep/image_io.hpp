#pragma once

#include <filesystem>

#include "polarsep/image.hpp"

namespace polarsep {

// PNG (8/16-bit, gray or RGB) for LDR images and PFM (portable float map,
// negative-scale little-endian convention, rows bottom-to-top) for float
// images. No other formats; no color management — PNG code values map
// linearly onto [0,1].

// Dispatches on extension (.png / .pfm, case-insensitive).
ImageF load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const ImageF& img);

ImageF load_png(const std::filesystem::path& path);
// Samples are clipped to [0,1] and quantized to the requested depth.
void save_png(const std::filesystem::path& path, const ImageF& img,
              int bits = 8);

ImageF load_pfm(const std::filesystem::path& path);
// Stored as 32-bit floats (format-mandated narrowing from double).
void save_pfm(const std::filesystem::path& path, const ImageF& img);

}  // namespace polarsep
