#include "docenh/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "docenh/kernels.hpp"

namespace docenh {

IlluminationSurface::IlluminationSurface(Image gains) : gains_(std::move(gains)) {
  for (double v : gains_.data()) {
    if (!(v >= kMinGain && v <= 1.0)) {
      throw std::invalid_argument("illumination gain outside [0.01, 1]: " + std::to_string(v));
    }
  }
}

IlluminationSurface IlluminationSurface::clamped(const Image& gains) {
  std::vector<double> data(gains.data().begin(), gains.data().end());
  for (double& v : data) v = std::clamp(v, kMinGain, 1.0);
  return IlluminationSurface(Image(gains.width(), gains.height(), gains.channels(), std::move(data)));
}

IlluminationSurface IlluminationSurface::uniform(int width, int height, int channels, double gain) {
  return IlluminationSurface(Image::filled(width, height, channels, gain));
}

void ToneParams::validate() const {
  if (!(black_point >= 0.0 && black_point < white_point && white_point <= 1.0)) {
    throw std::invalid_argument("tone params need 0 <= black_point < white_point <= 1");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("tone gamma must be positive");
  }
}

int default_illumination_window(int width, int height) {
  int w = static_cast<int>(std::lround(std::min(width, height) / 16.0));
  if (w % 2 == 0) ++w;
  return std::max(w, 3);
}

IlluminationSurface estimate_illumination(const Image& raw, std::optional<int> window) {
  const int k = window.value_or(default_illumination_window(raw.width(), raw.height()));
  if (k < 3 || k % 2 == 0) {
    throw std::invalid_argument("illumination window must be odd and >= 3, got " +
                                std::to_string(k));
  }
  if (k > raw.width() || k > raw.height()) {
    throw std::invalid_argument("illumination window " + std::to_string(k) +
                                " larger than " + std::to_string(raw.width()) + "x" +
                                std::to_string(raw.height()) + " image");
  }
  std::vector<Plane> planes;
  planes.reserve(raw.channels());
  for (int c = 0; c < raw.channels(); ++c) {
    const Plane closed = kernels::min_filter(kernels::max_filter(channel_plane(raw, c), k), k);
    Plane smooth = kernels::box_blur(closed, k);
    for (double& v : smooth.data()) v = std::clamp(v, IlluminationSurface::kMinGain, 1.0);
    planes.push_back(std::move(smooth));
  }
  return IlluminationSurface(from_planes(planes));
}

Image retinex_divide(const Image& raw, const IlluminationSurface& surface) {
  if (!raw.same_shape(surface.gains())) {
    throw ShapeError("retinex_divide: raw and surface shapes differ");
  }
  const auto r = raw.data();
  const auto l = surface.gains().data();
  std::vector<double> out(r.size());
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = std::min(r[i] / l[i], 1.0);
  return Image(raw.width(), raw.height(), raw.channels(), std::move(out));
}

Image tone_map(const Image& image, const ToneParams& params) {
  params.validate();
  const double b = params.black_point, range = params.white_point - params.black_point;
  const double g = params.gamma;
  const auto src = image.data();
  std::vector<double> out(src.size());
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double t = std::clamp((src[i] - b) / range, 0.0, 1.0);
    out[i] = g == 1.0 ? t : std::pow(t, g);
  }
  return Image(image.width(), image.height(), image.channels(), std::move(out));
}

EnhanceResult enhance_document(const Image& raw, const ToneParams& params) {
  params.validate();
  IlluminationSurface surface = estimate_illumination(raw);
  Image enhanced = tone_map(retinex_divide(raw, surface), params);
  return {std::move(enhanced), std::move(surface)};
}

}  // namespace docenh
