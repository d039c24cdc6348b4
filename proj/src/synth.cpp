#include "docenh/synth.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <vector>

namespace docenh::synth {

namespace {

using Ink = std::array<double, 3>;

void fill_rect(std::vector<double>& data, int width, int height, int channels, int x0, int y0,
               int w, int h, const Ink& ink) {
  for (int y = std::max(y0, 0); y < std::min(y0 + h, height); ++y) {
    for (int x = std::max(x0, 0); x < std::min(x0 + w, width); ++x) {
      for (int c = 0; c < channels; ++c) {
        data[(static_cast<std::size_t>(y) * width + x) * channels + c] = ink[c];
      }
    }
  }
}

}  // namespace

Image text_page(const PageOptions& o, Rng& rng) {
  std::vector<double> data(static_cast<std::size_t>(o.width) * o.height * o.channels, o.paper);
  const int usable = o.width - 2 * o.margin;
  const int x_lo = o.margin + static_cast<int>(std::floor(usable * o.text_begin));
  const int x_hi = o.margin + static_cast<int>(std::floor(usable * o.text_end));

  for (int top = o.margin; top + o.glyph_height <= o.height - o.margin; top += o.line_pitch) {
    if (rng.uniform() < 0.08) continue;  // paragraph gap
    const int line_end = rng.uniform() < 0.2
                             ? x_lo + static_cast<int>((x_hi - x_lo) * rng.uniform(0.3, 0.9))
                             : x_hi;
    int x = x_lo;
    while (true) {
      const int glyphs = static_cast<int>(rng.uniform_int(2, 7));
      Ink ink;
      const double gray = rng.uniform(0.0, 0.15);
      ink.fill(gray);
      if (o.channels == 3 && rng.uniform() < o.color_word_fraction) {
        const int hue = static_cast<int>(rng.uniform_int(0, 2));
        ink[hue] = rng.uniform(0.45, 0.65);
      }
      int word_width = 0;
      std::vector<int> widths(glyphs);
      for (int& w : widths) {
        w = static_cast<int>(rng.uniform_int(5, 8));
        word_width += w + 2;
      }
      if (x + word_width > line_end) break;
      for (int w : widths) {
        unsigned mask;
        do {
          mask = static_cast<unsigned>(rng.uniform_int(1, 31));
        } while ((mask & 0b00011u) == 0 || std::popcount(mask) < 2);
        const int s = o.stroke, gh = o.glyph_height;
        if (mask & 0b00001u) fill_rect(data, o.width, o.height, o.channels, x, top, s, gh, ink);
        if (mask & 0b00010u) fill_rect(data, o.width, o.height, o.channels, x + w - s, top, s, gh, ink);
        if (mask & 0b00100u) fill_rect(data, o.width, o.height, o.channels, x, top, w, s, ink);
        if (mask & 0b01000u) fill_rect(data, o.width, o.height, o.channels, x, top + gh / 2 - s / 2, w, s, ink);
        if (mask & 0b10000u) fill_rect(data, o.width, o.height, o.channels, x, top + gh - s, w, s, ink);
        x += w + 2;
      }
      x += static_cast<int>(rng.uniform_int(6, 10));
    }
  }
  return Image(o.width, o.height, o.channels, std::move(data));
}

IlluminationSurface smooth_surface(int width, int height, int channels, Rng& rng, double lo,
                                   double hi) {
  const double angle = rng.uniform(0.0, 2.0 * 3.141592653589793);
  const double tilt = rng.uniform(0.3, 1.0);
  const double bx = rng.uniform(0.0, 1.0) * width, by = rng.uniform(0.0, 1.0) * height;
  const double radius = rng.uniform(0.35, 0.6) * std::max(width, height);
  const double depth = rng.uniform(0.4, 1.0);
  std::array<double, 3> tint{1.0, 1.0, 1.0};
  if (channels == 3) {
    for (double& t : tint) t = rng.uniform(0.85, 1.0);
    tint[rng.uniform_int(0, 2)] = 1.0;
  }

  std::vector<double> field(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width - 0.5, v = (y + 0.5) / height - 0.5;
      const double plane = tilt * (u * std::cos(angle) + v * std::sin(angle));
      const double dx = x - bx, dy = y - by;
      const double blob = depth * std::exp(-(dx * dx + dy * dy) / (2.0 * radius * radius));
      field[static_cast<std::size_t>(y) * width + x] = plane - blob;
    }
  }
  const auto [mn, mx] = std::minmax_element(field.begin(), field.end());
  const double fmin = *mn, span = std::max(*mx - *mn, 1e-12);

  std::vector<double> data(field.size() * channels);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double s = (field[i] - fmin) / span;
    for (int c = 0; c < channels; ++c) {
      data[i * channels + c] = std::clamp(lo + (hi - lo) * s * tint[c], lo, hi);
    }
  }
  return IlluminationSurface::clamped(Image(width, height, channels, std::move(data)));
}

IlluminationSurface linear_gradient(int width, int height, int channels, double from, double to) {
  std::vector<double> data(static_cast<std::size_t>(width) * height * channels);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = width == 1 ? 0.0 : static_cast<double>(x) / (width - 1);
      for (int c = 0; c < channels; ++c) {
        data[(static_cast<std::size_t>(y) * width + x) * channels + c] = from + (to - from) * t;
      }
    }
  }
  return IlluminationSurface::clamped(Image(width, height, channels, std::move(data)));
}

Image add_gaussian_noise(const Image& image, double sigma, Rng& rng) {
  std::vector<double> data(image.data().begin(), image.data().end());
  for (double& v : data) {
    const double noisy = std::clamp(v + sigma * rng.normal(), 0.0, 1.0);
    v = static_cast<double>(std::lround(noisy * 255.0)) / 255.0;
  }
  return Image(image.width(), image.height(), image.channels(), std::move(data));
}

Image checkerboard(int width, int height, int cell) {
  std::vector<double> data(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      data[static_cast<std::size_t>(y) * width + x] = ((x / cell + y / cell) % 2) ? 1.0 : 0.0;
    }
  }
  return Image(width, height, 1, std::move(data));
}

}  // namespace docenh::synth
