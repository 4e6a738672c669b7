#include "polarsep/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "polarsep/errors.hpp"
#include "polarsep/kernels.hpp"

namespace polarsep {
namespace {

std::string lower_ext(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// ---------------------------------------------------------------------------
// PFM
// ---------------------------------------------------------------------------

std::string read_pfm_token(std::istream& in) {
  std::string tok;
  in >> tok;
  if (!in) throw IoError("pfm: truncated header");
  return tok;
}

}  // namespace

ImageF load_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("pfm: cannot open " + path.string());

  const std::string magic = read_pfm_token(in);
  int channels = 0;
  if (magic == "PF") channels = 3;
  else if (magic == "Pf") channels = 1;
  else throw IoError("pfm: bad magic in " + path.string());

  const int width = std::stoi(read_pfm_token(in));
  const int height = std::stoi(read_pfm_token(in));
  const double scale = std::stod(read_pfm_token(in));
  if (width <= 0 || height <= 0) throw IoError("pfm: bad dimensions");
  in.get();  // single whitespace byte terminating the header

  const bool little_endian = scale < 0.0;
  const std::size_t count =
      static_cast<std::size_t>(width) * height * channels;
  std::vector<float> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) throw IoError("pfm: truncated pixel data in " + path.string());

  if (!little_endian) {
    for (float& f : raw) {
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      u = __builtin_bswap32(u);
      std::memcpy(&f, &u, 4);
    }
  }

  // PFM rows run bottom-to-top.
  ImageF img(width, height, channels);
  const std::size_t row = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    const float* src = raw.data() + static_cast<std::size_t>(height - 1 - y) * row;
    double* dst = img.data() + static_cast<std::size_t>(y) * row;
    for (std::size_t i = 0; i < row; ++i) dst[i] = static_cast<double>(src[i]);
  }
  if (!img.all_finite()) throw IoError("pfm: non-finite samples in " + path.string());
  return img;
}

void save_pfm(const std::filesystem::path& path, const ImageF& img) {
  require_nonempty(img, "save_pfm");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("pfm: cannot write " + path.string());

  out << (img.channels() == 3 ? "PF" : "Pf") << "\n"
      << img.width() << " " << img.height() << "\n"
      << "-1.0\n";

  const std::size_t row = static_cast<std::size_t>(img.width()) * img.channels();
  std::vector<float> buf(row);
  for (int y = img.height() - 1; y >= 0; --y) {
    const double* src = img.data() + static_cast<std::size_t>(y) * row;
    for (std::size_t i = 0; i < row; ++i) buf[i] = static_cast<float>(src[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(row * sizeof(float)));
  }
  if (!out) throw IoError("pfm: write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------------

ImageF load_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw IoError("png: cannot open " + path.string());

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw IoError("png: read struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png: info struct allocation failed");
  }

  std::vector<std::uint8_t> bytes;
  std::vector<png_bytep> rows;
  int width = 0, height = 0, channels = 0, depth = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: decode failed for " + path.string());
  }

  png_init_io(png, file.get());
  png_read_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if ((color & PNG_COLOR_MASK_ALPHA) || png_get_valid(png, info, PNG_INFO_tRNS)) {
    // Alpha (including tRNS-expanded palette alpha) is dropped up front;
    // png_read_update_info may only run once.
    png_set_strip_alpha(png);
  }
  if (depth == 16) png_set_swap(png);  // PNG is big-endian on disk

  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: unsupported channel layout in " + path.string());
  }

  const std::size_t stride = png_get_rowbytes(png, info);
  bytes.resize(stride * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = bytes.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  ImageF img(width, height, channels);
  const std::size_t n = img.sample_count();
  if (depth == 16) {
    const double denom = 65535.0;
    const std::uint16_t* src = reinterpret_cast<const std::uint16_t*>(bytes.data());
    for (std::size_t i = 0; i < n; ++i) img.data()[i] = src[i] / denom;
  } else {
    const double denom = 255.0;
    for (std::size_t i = 0; i < n; ++i) img.data()[i] = bytes[i] / denom;
  }
  return img;
}

void save_png(const std::filesystem::path& path, const ImageF& img, int bits) {
  require_nonempty(img, "save_png");
  if (bits != 8 && bits != 16) {
    throw InvalidInputError("save_png: bit depth must be 8 or 16");
  }

  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw IoError("png: cannot write " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw IoError("png: write struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: info struct allocation failed");
  }

  const int width = img.width();
  const int height = img.height();
  const int channels = img.channels();
  const double levels = (bits == 8) ? 255.0 : 65535.0;

  // Quantize through the shared kernel so PNG bytes match clip_quantize.
  std::vector<double> q(img.sample_count());
  kernels::active().quantize_unit(img.data(), q.data(), q.size(), levels);

  std::vector<std::uint8_t> bytes;
  const std::size_t n = img.sample_count();
  if (bits == 8) {
    bytes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      bytes[i] = static_cast<std::uint8_t>(std::lrint(q[i] * levels));
    }
  } else {
    bytes.resize(n * 2);
    std::uint16_t* dst = reinterpret_cast<std::uint16_t*>(bytes.data());
    for (std::size_t i = 0; i < n; ++i) {
      dst[i] = static_cast<std::uint16_t>(std::lrint(q[i] * levels));
    }
  }

  std::vector<png_bytep> rows(height);
  const std::size_t stride =
      static_cast<std::size_t>(width) * channels * (bits / 8);
  for (int y = 0; y < height; ++y) rows[y] = bytes.data() + stride * y;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: encode failed for " + path.string());
  }

  png_init_io(png, file.get());
  png_set_compression_level(png, 6);  // pinned for byte-stable output
  png_set_IHDR(png, info, width, height, bits,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bits == 16) png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageF load_image(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".pfm") return load_pfm(path);
  throw IoError("unsupported image format: " + path.string());
}

void save_image(const std::filesystem::path& path, const ImageF& img) {
  const std::string ext = lower_ext(path);
  if (ext == ".png") return save_png(path, img);
  if (ext == ".pfm") return save_pfm(path, img);
  throw IoError("unsupported image format: " + path.string());
}

}  // namespace polarsep
