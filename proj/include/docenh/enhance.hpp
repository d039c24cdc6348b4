#pragma once

#include <optional>

#include "docenh/image.hpp"

namespace docenh {

/// Strictly positive multiplicative lighting field with values in
/// [kMinGain, 1]. Wraps an Image of the same shape as the capture it
/// belongs to.
class IlluminationSurface {
 public:
  static constexpr double kMinGain = 0.01;

  IlluminationSurface() = default;
  /// Throws std::invalid_argument if any gain lies outside [kMinGain, 1].
  explicit IlluminationSurface(Image gains);

  /// Clamps every value into [kMinGain, 1] first.
  static IlluminationSurface clamped(const Image& gains);
  static IlluminationSurface uniform(int width, int height, int channels, double gain);

  const Image& gains() const noexcept { return gains_; }
  int width() const noexcept { return gains_.width(); }
  int height() const noexcept { return gains_.height(); }
  int channels() const noexcept { return gains_.channels(); }
  double at(int x, int y, int c) const noexcept { return gains_.at(x, y, c); }

  friend bool operator==(const IlluminationSurface&, const IlluminationSurface&) = default;

 private:
  Image gains_;
};

/// Piecewise-linear stretch t(v) = clamp((v - black) / (white - black), 0, 1)^gamma.
struct ToneParams {
  double black_point = 0.05;
  double white_point = 0.92;
  double gamma = 1.0;

  /// Throws std::invalid_argument unless 0 <= black < white <= 1 and gamma > 0.
  void validate() const;

  friend bool operator==(const ToneParams&, const ToneParams&) = default;
};

/// round(min(width, height) / 16), forced odd, at least 3.
int default_illumination_window(int width, int height);

/// Per channel: closing (max filter, then min filter) followed by a box blur
/// with the same square window, clamped to [kMinGain, 1]. The window must be
/// odd, >= 3, and no larger than the image.
IlluminationSurface estimate_illumination(const Image& raw, std::optional<int> window = {});

/// out = clamp(raw / surface, 0, 1).
Image retinex_divide(const Image& raw, const IlluminationSurface& surface);

Image tone_map(const Image& image, const ToneParams& params);

struct EnhanceResult {
  Image enhanced;
  IlluminationSurface surface;
};

/// estimate_illumination (default window) -> retinex_divide -> tone_map.
EnhanceResult enhance_document(const Image& raw, const ToneParams& params = {});

}  // namespace docenh
