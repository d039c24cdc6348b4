#include "docenh/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace docenh {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("raster dimensions must be at least 1x1, got " +
                                std::to_string(width) + "x" +
                                std::to_string(height));
  }
}

}  // namespace

Plane::Plane(int width, int height, double fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Plane::Plane(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw ShapeError("plane data length does not match " +
                     std::to_string(width) + "x" + std::to_string(height));
  }
}

Image::Image(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height);
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("image must have 1 or 3 channels, got " +
                                std::to_string(channels));
  }
  if (data_.size() != pixel_count() * channels) {
    throw ShapeError("image data length does not match its dimensions");
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("image intensity outside [0, 1]: " +
                                  std::to_string(v));
    }
  }
}

Image Image::filled(int width, int height, int channels, double value) {
  check_dims(width, height);
  return Image(width, height, channels,
               std::vector<double>(static_cast<std::size_t>(width) * height *
                                       std::max(channels, 0),
                                   value));
}

Plane to_luminance(const Image& image) {
  Plane out(image.width(), image.height());
  auto dst = out.data();
  const auto src = image.data();
  if (image.channels() == 1) {
    std::copy(src.begin(), src.end(), dst.begin());
    return out;
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    // Rounding can push a gray pixel one ulp outside its channel range.
    dst[i] = std::clamp(0.299 * r + 0.587 * g + 0.114 * b, std::min({r, g, b}),
                        std::max({r, g, b}));
  }
  return out;
}

Image crop(const Image& image, Region region) {
  if (region.size < 1 || region.x < 0 || region.y < 0 ||
      region.x + region.size > image.width() ||
      region.y + region.size > image.height()) {
    throw std::out_of_range("crop region (" + std::to_string(region.x) + ", " +
                            std::to_string(region.y) + ", " +
                            std::to_string(region.size) + ") outside " +
                            std::to_string(image.width()) + "x" +
                            std::to_string(image.height()) + " image");
  }
  const int c = image.channels();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(region.size) * region.size * c);
  const auto src = image.data();
  for (int y = region.y; y < region.y + region.size; ++y) {
    const auto begin = src.begin() + image.index(region.x, y, 0);
    data.insert(data.end(), begin, begin + static_cast<std::ptrdiff_t>(region.size) * c);
  }
  return Image(region.size, region.size, c, std::move(data));
}

Image embed(const Image& image, const Image& patch, int x, int y) {
  if (patch.channels() != image.channels()) {
    throw ShapeError("embed: channel count mismatch");
  }
  if (x < 0 || y < 0 || x + patch.width() > image.width() ||
      y + patch.height() > image.height()) {
    throw std::out_of_range("embed: patch does not fit at the given offset");
  }
  std::vector<double> data(image.data().begin(), image.data().end());
  const int c = image.channels();
  for (int py = 0; py < patch.height(); ++py) {
    const auto src = patch.data().begin() + patch.index(0, py, 0);
    std::copy(src, src + static_cast<std::ptrdiff_t>(patch.width()) * c,
              data.begin() + static_cast<std::ptrdiff_t>(image.index(x, y + py, 0)));
  }
  return Image(image.width(), image.height(), c, std::move(data));
}

Plane channel_plane(const Image& image, int channel) {
  if (channel < 0 || channel >= image.channels()) {
    throw std::out_of_range("channel index out of range");
  }
  Plane out(image.width(), image.height());
  auto dst = out.data();
  const auto src = image.data();
  const auto c = static_cast<std::size_t>(image.channels());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i * c + channel];
  return out;
}

Image from_planes(std::span<const Plane> planes) {
  if (planes.size() != 1 && planes.size() != 3) {
    throw std::invalid_argument("from_planes needs 1 or 3 planes");
  }
  const int w = planes[0].width(), h = planes[0].height();
  for (const auto& p : planes) {
    if (p.width() != w || p.height() != h) throw ShapeError("from_planes: plane size mismatch");
  }
  const std::size_t c = planes.size();
  std::vector<double> data(static_cast<std::size_t>(w) * h * c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const auto src = planes[ch].data();
    for (std::size_t i = 0; i < src.size(); ++i) {
      data[i * c + ch] = std::clamp(src[i], 0.0, 1.0);
    }
  }
  return Image(w, h, static_cast<int>(c), std::move(data));
}

Image resize_bilinear(const Image& image, int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("resize target must be at least 1x1");
  }
  if (width == image.width() && height == image.height()) return image;

  struct Tap {
    int lo, hi;
    double frac;
  };
  auto taps = [](int src, int dst) {
    std::vector<Tap> t(dst);
    const double scale = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
      const double s = std::clamp((i + 0.5) * scale - 0.5, 0.0, src - 1.0);
      const int lo = static_cast<int>(std::floor(s));
      t[i] = {lo, std::min(lo + 1, src - 1), s - lo};
    }
    return t;
  };
  const auto tx = taps(image.width(), width);
  const auto ty = taps(image.height(), height);
  const int c = image.channels();

  std::vector<double> data(static_cast<std::size_t>(width) * height * c);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        const double top = image.at(tx[x].lo, ty[y].lo, ch) * (1.0 - tx[x].frac) +
                           image.at(tx[x].hi, ty[y].lo, ch) * tx[x].frac;
        const double bottom = image.at(tx[x].lo, ty[y].hi, ch) * (1.0 - tx[x].frac) +
                              image.at(tx[x].hi, ty[y].hi, ch) * tx[x].frac;
        const double v = top * (1.0 - ty[y].frac) + bottom * ty[y].frac;
        data[(static_cast<std::size_t>(y) * width + x) * c + ch] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return Image(width, height, c, std::move(data));
}

Image convert_channels(const Image& image, int channels) {
  if (channels == image.channels()) return image;
  if (channels == 1) {
    Plane lum = to_luminance(image);
    return from_planes(std::span<const Plane>(&lum, 1));
  }
  if (channels == 3) {
    const Plane p = channel_plane(image, 0);
    const Plane planes[3] = {p, p, p};
    return from_planes(planes);
  }
  throw std::invalid_argument("convert_channels: unsupported channel count");
}

Image quantize8(const Image& image) {
  std::vector<double> data(image.data().begin(), image.data().end());
  for (double& v : data) v = static_cast<double>(std::lround(v * 255.0)) / 255.0;
  return Image(image.width(), image.height(), image.channels(), std::move(data));
}

double max_abs_difference(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ShapeError("max_abs_difference: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

}  // namespace docenh
