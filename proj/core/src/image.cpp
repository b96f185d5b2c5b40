#include "lpf/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cerrno>
#include <cstring>
#include <iostream>
#include <memory>
#include <string>

#include "lpf/error.hpp"

namespace lpf {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io-error";
    case ErrorKind::format: return "format-error";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::degenerate_geometry: return "degenerate-geometry";
    case ErrorKind::image_too_small: return "image-too-small";
    case ErrorKind::non_finite: return "non-finite";
  }
  return "unknown";
}

Image::Image(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::invalid_argument, "image dimensions must be >= 1");
  }
  data_.assign(pixel_count() * kChannels, fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::invalid_argument, "image dimensions must be >= 1");
  }
  if (data_.size() != pixel_count() * kChannels) {
    throw Error(ErrorKind::invalid_argument, "image data length does not match width*height*3");
  }
}

ScalarField::ScalarField(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::invalid_argument, "field dimensions must be >= 1");
  }
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

namespace {

// libpng reports errors through longjmp. Everything between setjmp and the
// last libpng call below is kept trivially destructible.
struct PngErrorSink {
  char message[256];
};

void png_error_to_sink(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof(sink->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

struct RawPng {
  unsigned char* pixels;  // malloc'd, width * height * 3
  png_uint_32 width;
  png_uint_32 height;
  int had_alpha;
  int unsupported;  // 0 ok, otherwise a reason code
  int bit_depth;
  int color_type;
};

// Returns 0 on success, 1 on libpng error (message in sink).
int read_png_raw(std::FILE* fp, RawPng* out, PngErrorSink* sink) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, sink,
                                           png_error_to_sink, png_warning_ignore);
  if (png == nullptr) {
    std::snprintf(sink->message, sizeof(sink->message), "png_create_read_struct failed");
    return 1;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    std::snprintf(sink->message, sizeof(sink->message), "png_create_info_struct failed");
    return 1;
  }
  png_bytep* volatile rows = nullptr;
  unsigned char* volatile pixels = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    std::free(rows);
    std::free(pixels);
    png_destroy_read_struct(&png, &info, nullptr);
    return 1;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  out->width = width;
  out->height = height;
  out->bit_depth = bit_depth;
  out->color_type = color_type;
  out->had_alpha = 0;
  out->unsupported = 0;
  if (bit_depth != 8) {
    out->unsupported = 1;
  } else if (color_type != PNG_COLOR_TYPE_RGB && color_type != PNG_COLOR_TYPE_RGB_ALPHA) {
    out->unsupported = 2;
  }
  if (out->unsupported != 0) {
    png_destroy_read_struct(&png, &info, nullptr);
    return 0;
  }
  if (color_type == PNG_COLOR_TYPE_RGB_ALPHA) {
    out->had_alpha = 1;
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * 3;
  pixels = static_cast<unsigned char*>(std::malloc(stride * height));
  rows = static_cast<png_bytep*>(std::malloc(sizeof(png_bytep) * height));
  if (pixels == nullptr || rows == nullptr) {
    png_error(png, "out of memory");
  }
  for (png_uint_32 r = 0; r < height; ++r) {
    rows[r] = pixels + stride * r;
  }
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  std::free(rows);
  out->pixels = pixels;
  png_destroy_read_struct(&png, &info, nullptr);
  return 0;
}

int write_png_raw(std::FILE* fp, const unsigned char* pixels, png_uint_32 width,
                  png_uint_32 height, int color_type, int channels, PngErrorSink* sink) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, sink,
                                            png_error_to_sink, png_warning_ignore);
  if (png == nullptr) {
    std::snprintf(sink->message, sizeof(sink->message), "png_create_write_struct failed");
    return 1;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    std::snprintf(sink->message, sizeof(sink->message), "png_create_info_struct failed");
    return 1;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return 1;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  for (png_uint_32 r = 0; r < height; ++r) {
    png_write_row(png, pixels + stride * r);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return 0;
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::filesystem::path& path, const char* mode) {
  FilePtr fp(std::fopen(path.c_str(), mode));
  if (!fp) {
    throw Error(ErrorKind::io, "cannot open '" + path.string() + "': " + std::strerror(errno));
  }
  return fp;
}

void write_png(const std::filesystem::path& path, const unsigned char* pixels, int width,
               int height, int color_type, int channels) {
  FilePtr fp = open_or_throw(path, "wb");
  PngErrorSink sink{};
  if (write_png_raw(fp.get(), pixels, static_cast<png_uint_32>(width),
                    static_cast<png_uint_32>(height), color_type, channels, &sink) != 0) {
    throw Error(ErrorKind::io, "failed to write PNG '" + path.string() + "': " + sink.message);
  }
  if (std::fflush(fp.get()) != 0) {
    throw Error(ErrorKind::io, "failed to flush '" + path.string() + "'");
  }
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  FilePtr fp = open_or_throw(path, "rb");
  unsigned char signature[8] = {};
  if (std::fread(signature, 1, sizeof(signature), fp.get()) != sizeof(signature) ||
      png_sig_cmp(signature, 0, sizeof(signature)) != 0) {
    throw Error(ErrorKind::format, "'" + path.string() + "' is not a PNG file");
  }
  std::rewind(fp.get());

  RawPng raw{};
  PngErrorSink sink{};
  if (read_png_raw(fp.get(), &raw, &sink) != 0) {
    throw Error(ErrorKind::format, "failed to decode PNG '" + path.string() + "': " + sink.message);
  }
  if (raw.unsupported == 1) {
    throw Error(ErrorKind::format, "'" + path.string() + "': unsupported bit depth " +
                                       std::to_string(raw.bit_depth) + " (expected 8)");
  }
  if (raw.unsupported == 2) {
    throw Error(ErrorKind::format, "'" + path.string() + "': unsupported PNG color type " +
                                       std::to_string(raw.color_type) + " (expected RGB or RGBA)");
  }
  std::unique_ptr<unsigned char, decltype(&std::free)> owned(raw.pixels, &std::free);
  if (raw.had_alpha != 0) {
    std::cerr << "warning: dropping alpha channel of '" << path.string() << "'\n";
  }
  const int width = static_cast<int>(raw.width);
  const int height = static_cast<int>(raw.height);
  std::vector<double> data(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = static_cast<double>(owned.get()[i]) / 255.0;
  }
  return Image(width, height, std::move(data));
}

unsigned char quantize_byte(double value) noexcept {
  const double clamped = std::clamp(value, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(clamped * 255.0));
}

Image quantize(const Image& image) {
  Image out = image;
  for (double& v : out.data()) {
    v = static_cast<double>(quantize_byte(v)) / 255.0;
  }
  return out;
}

void save_image(const Image& image, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(image.size());
  const auto values = image.data();
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = quantize_byte(values[i]);
  }
  write_png(path, bytes.data(), image.width(), image.height(), PNG_COLOR_TYPE_RGB, 3);
}

void save_gray_png(int width, int height, std::span<const unsigned char> bytes,
                   const std::filesystem::path& path) {
  if (width < 1 || height < 1 ||
      bytes.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorKind::invalid_argument, "grayscale buffer does not match dimensions");
  }
  write_png(path, bytes.data(), width, height, PNG_COLOR_TYPE_GRAY, 1);
}

Image resize_long_edge(const Image& image, int long_edge) {
  if (long_edge < 1) {
    throw Error(ErrorKind::invalid_argument, "long edge must be >= 1");
  }
  const int src_long = std::max(image.width(), image.height());
  const double scale = static_cast<double>(long_edge) / static_cast<double>(src_long);
  const int width = std::max(1, static_cast<int>(std::lround(image.width() * scale)));
  const int height = std::max(1, static_cast<int>(std::lround(image.height() * scale)));
  if (width == image.width() && height == image.height()) {
    return image;
  }
  Image out(width, height);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int row = 0; row < height; ++row) {
    const double fy = std::clamp((row + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (int col = 0; col < width; ++col) {
      const double fx = std::clamp((col + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < Image::kChannels; ++c) {
        const double top = (1 - wx) * image.at(x0, y0, c) + wx * image.at(x1, y0, c);
        const double bottom = (1 - wx) * image.at(x0, y1, c) + wx * image.at(x1, y1, c);
        out.at(col, row, c) = (1 - wy) * top + wy * bottom;
      }
    }
  }
  return out;
}

}  // namespace lpf
