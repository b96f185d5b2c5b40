#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace lpf {

/// H x W x 3 raster, row-major, interleaved RGB, nominal range [0, 1].
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t size() const noexcept { return data_.size(); }

  double& at(int col, int row, int channel) noexcept {
    return data_[index(col, row, channel)];
  }
  double at(int col, int row, int channel) const noexcept {
    return data_[index(col, row, channel)];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int col, int row, int channel) const noexcept {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(col)) * kChannels +
           static_cast<std::size_t>(channel);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Single-channel H x W grid of doubles. Used for filter heatmaps s(x, y)
/// and as the working plane of the SSIM machinery.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(int width, int height, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& at(int col, int row) noexcept {
    return values_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(col)];
  }
  double at(int col, int row) const noexcept {
    return values_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(col)];
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const ScalarField& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Maps pixel indices to [0,1]^2: x = col / (width - 1), y = row / (height - 1).
/// A one-pixel extent maps to 0.
class NormalizedCoords {
 public:
  NormalizedCoords(int width, int height) : width_(width), height_(height) {}

  double x(int col) const noexcept {
    return width_ > 1 ? static_cast<double>(col) / static_cast<double>(width_ - 1) : 0.0;
  }
  double y(int row) const noexcept {
    return height_ > 1 ? static_cast<double>(row) / static_cast<double>(height_ - 1) : 0.0;
  }

 private:
  int width_;
  int height_;
};

/// Reads an 8-bit RGB/RGBA PNG; alpha is dropped with a warning on stderr.
/// Throws Error{io} or Error{format}.
Image load_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG with byte = round(clamp(v, 0, 1) * 255).
void save_image(const Image& image, const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG; values are already bytes.
void save_gray_png(int width, int height, std::span<const unsigned char> bytes,
                   const std::filesystem::path& path);

unsigned char quantize_byte(double value) noexcept;

/// Snaps every value onto the k/255 grid, as a save/load round trip would.
Image quantize(const Image& image);

/// Bilinear resample so the longer edge equals `long_edge` pixels.
Image resize_long_edge(const Image& image, int long_edge);

}  // namespace lpf
