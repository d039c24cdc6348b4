#pragma once

#include <span>

#include "docenh/image.hpp"

// Pixel kernels used by illumination estimation, crop gating and the SSIM
// family. The functions in `docenh::kernels` are the OpenMP-parallel
// versions used in production. `docenh::kernels::reference` holds naive
// serial versions of the same contracts; they exist for tests and the
// benchmark and are deliberately straightforward.
//
// All reductions are ordered (per-row partials summed in row order), so
// results do not depend on the number of threads.

namespace docenh::kernels {

/// Square-window maximum, centered, window clipped at the borders.
/// `window` must be odd and >= 1.
Plane max_filter(const Plane& in, int window);
Plane min_filter(const Plane& in, int window);

/// Square-window mean with replicated borders.
Plane box_blur(const Plane& in, int window);

/// Separable correlation with `taps` along x then y, keeping only fully
/// covered positions (output is (w - k + 1) x (h - k + 1)).
Plane separable_valid(const Plane& in, std::span<const double> taps);

/// 2x2 mean pooling; an odd trailing row/column is dropped.
Plane downsample2(const Plane& in);

/// 4-neighbour Laplacian [[0,1,0],[1,-4,1],[0,1,0]] with replicated borders.
Plane laplacian(const Plane& in);

/// Sum of |laplacian(in)| without materializing the response.
double laplacian_abs_sum(const Plane& in);

/// Elementwise product a * b.
Plane multiply(const Plane& a, const Plane& b);

/// Ordered sum of every element.
double sum(const Plane& in);

/// Normalized 1-D Gaussian of odd length `size`.
std::vector<double> gaussian_taps(int size, double sigma);

namespace reference {

Plane max_filter(const Plane& in, int window);
Plane min_filter(const Plane& in, int window);
Plane box_blur(const Plane& in, int window);
Plane separable_valid(const Plane& in, std::span<const double> taps);
Plane downsample2(const Plane& in);
Plane laplacian(const Plane& in);
double laplacian_abs_sum(const Plane& in);

}  // namespace reference

}  // namespace docenh::kernels
