#pragma once

#include <cstdint>

#include "docenh/enhance.hpp"
#include "docenh/image.hpp"
#include "docenh/rng.hpp"

// Synthetic document fixtures with known ground truth: clean text pages and
// smooth lighting fields. Used by tests, the acceptance suite and the
// benchmarks.

namespace docenh::synth {

struct PageOptions {
  int width = 384;
  int height = 320;
  int channels = 3;
  double paper = 1.0;        // background intensity
  int line_pitch = 24;       // baseline spacing
  int glyph_height = 11;
  int stroke = 2;
  int margin = 16;
  double text_begin = 0.0;   // horizontal extent of the text block, as fractions
  double text_end = 1.0;     // of the usable width
  double color_word_fraction = 0.2;
};

/// White page with rows of stroke glyphs. Ink is dark gray, a fraction of
/// words tinted (colour pages only).
Image text_page(const PageOptions& options, Rng& rng);

/// Smooth lighting field in [lo, hi]: a tilted plane plus one broad shadow
/// blob, per-channel tint on colour surfaces.
IlluminationSurface smooth_surface(int width, int height, int channels, Rng& rng,
                                   double lo = 0.5, double hi = 1.0);

/// Linear ramp from `from` (left) to `to` (right), identical in every channel.
IlluminationSurface linear_gradient(int width, int height, int channels, double from, double to);

/// Adds N(0, sigma) noise, clamps and rounds to 8-bit levels.
Image add_gaussian_noise(const Image& image, double sigma, Rng& rng);

Image checkerboard(int width, int height, int cell);

}  // namespace docenh::synth
