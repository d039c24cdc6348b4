// Serial reference kernels: direct evaluation of each window, no tricks.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "docenh/kernels.hpp"

namespace docenh::kernels::reference {

namespace {

template <class Op>
Plane window_extreme(const Plane& in, int window, Op op) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("window must be odd");
  const int r = window / 2, w = in.width(), h = in.height();
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double best = in.at(x, y);
      for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy) {
        for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
          best = op(best, in.at(xx, yy));
        }
      }
      out.at(x, y) = best;
    }
  }
  return out;
}

}  // namespace

Plane max_filter(const Plane& in, int window) {
  return window_extreme(in, window, [](double a, double b) { return std::max(a, b); });
}

Plane min_filter(const Plane& in, int window) {
  return window_extreme(in, window, [](double a, double b) { return std::min(a, b); });
}

Plane box_blur(const Plane& in, int window) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("window must be odd");
  const int r = window / 2, w = in.width(), h = in.height();
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          acc += in.at(std::clamp(x + dx, 0, w - 1), std::clamp(y + dy, 0, h - 1));
        }
      }
      out.at(x, y) = acc / (static_cast<double>(window) * window);
    }
  }
  return out;
}

Plane separable_valid(const Plane& in, std::span<const double> taps) {
  const int k = static_cast<int>(taps.size());
  if (k < 1 || k > in.width() || k > in.height()) {
    throw std::invalid_argument("kernel larger than plane");
  }
  const int ow = in.width() - k + 1, oh = in.height() - k + 1;
  Plane out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) acc += taps[j] * taps[i] * in.at(x + i, y + j);
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

Plane downsample2(const Plane& in) {
  Plane out(in.width() / 2, in.height() / 2);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      double acc = 0.0;
      for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) acc += in.at(2 * x + i, 2 * y + j);
      }
      out.at(x, y) = acc / 4.0;
    }
  }
  return out;
}

Plane laplacian(const Plane& in) {
  static constexpr double kKernel[3][3] = {{0, 1, 0}, {1, -4, 1}, {0, 1, 0}};
  const int w = in.width(), h = in.height();
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int j = -1; j <= 1; ++j) {
        for (int i = -1; i <= 1; ++i) {
          acc += kKernel[j + 1][i + 1] *
                 in.at(std::clamp(x + i, 0, w - 1), std::clamp(y + j, 0, h - 1));
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

double laplacian_abs_sum(const Plane& in) {
  const Plane response = laplacian(in);
  double total = 0.0;
  for (double v : response.data()) total += std::abs(v);
  return total;
}

}  // namespace docenh::kernels::reference
