#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace docenh {

/// Raised when two rasters that must agree in shape do not.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Single-channel real-valued raster, row-major. Used as the working buffer
/// for the filter kernels; luminance planes hold values in [0, 1], while
/// metric workspaces may hold 8-bit scaled values.
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, double fill = 0.0);
  Plane(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double at(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  double& at(int x, int y) noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<const double> row(int y) const noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }
  std::span<double> row(int y) noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Square pixel window, top-left anchored.
struct Region {
  int x = 0;
  int y = 0;
  int size = 0;

  friend bool operator==(const Region&, const Region&) = default;
};

/// Normalized raster with 1 or 3 interleaved channels. Every intensity is
/// finite and lies in [0, 1]; the constructor enforces this.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, std::vector<double> data);

  static Image filled(int width, int height, int channels, double value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const noexcept { return data_.empty(); }

  double at(int x, int y, int c) const noexcept {
    return data_[index(x, y, c)];
  }
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Rec. 601 luma: 0.299 R + 0.587 G + 0.114 B. Single-channel input is copied.
Plane to_luminance(const Image& image);

/// Exact copy of `region`; throws std::out_of_range when it leaves the image.
Image crop(const Image& image, Region region);

/// Writes `patch` into a copy of `image` at (x, y).
Image embed(const Image& image, const Image& patch, int x, int y);

Plane channel_plane(const Image& image, int channel);

/// Interleaves planes back into an image, clamping each value into [0, 1].
Image from_planes(std::span<const Plane> planes);

/// Bilinear resampling with pixel-center alignment and edge clamping.
Image resize_bilinear(const Image& image, int width, int height);

/// 1 -> 3 by replication, 3 -> 1 by luminance.
Image convert_channels(const Image& image, int channels);

/// Rounds every value to the nearest 8-bit level (value * 255, half away
/// from zero), i.e. what a save/load roundtrip does.
Image quantize8(const Image& image);

double max_abs_difference(const Image& a, const Image& b);

}  // namespace docenh
