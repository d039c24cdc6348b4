#include "docenh/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace docenh::kernels {

namespace {

void check_window(int window) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("filter window must be odd and positive, got " +
                                std::to_string(window));
  }
}

Plane transpose(const Plane& in) {
  const int w = in.width(), h = in.height();
  Plane out(h, w);
  constexpr int kTile = 32;
#pragma omp parallel for schedule(static)
  for (int ty = 0; ty < h; ty += kTile) {
    for (int tx = 0; tx < w; tx += kTile) {
      for (int y = ty; y < std::min(ty + kTile, h); ++y) {
        for (int x = tx; x < std::min(tx + kTile, w); ++x) out.at(y, x) = in.at(x, y);
      }
    }
  }
  return out;
}

// van Herk / Gil-Werman running extreme: three comparisons per sample
// regardless of window length.
template <class Op>
void running_extreme(std::span<const double> src, std::span<double> dst, int radius,
                     double identity, Op op, std::vector<double>& g, std::vector<double>& h) {
  const int n = static_cast<int>(src.size());
  const int k = 2 * radius + 1;
  const int m = ((n + 2 * radius + k - 1) / k) * k;
  g.resize(m);
  h.resize(m);
  auto padded = [&](int i) {
    const int s = i - radius;
    return (s >= 0 && s < n) ? src[s] : identity;
  };
  for (int i = 0; i < m; ++i) g[i] = (i % k == 0) ? padded(i) : op(g[i - 1], padded(i));
  for (int i = m - 1; i >= 0; --i) {
    h[i] = (i % k == k - 1) ? padded(i) : op(h[i + 1], padded(i));
  }
  for (int j = 0; j < n; ++j) dst[j] = op(h[j], g[j + k - 1]);
}

template <class Op>
Plane rows_extreme(const Plane& in, int radius, double identity, Op op) {
  Plane out(in.width(), in.height());
#pragma omp parallel
  {
    std::vector<double> g, h;
#pragma omp for schedule(static)
    for (int y = 0; y < in.height(); ++y) {
      running_extreme(in.row(y), out.row(y), radius, identity, op, g, h);
    }
  }
  return out;
}

template <class Op>
Plane extreme_filter(const Plane& in, int window, double identity, Op op) {
  check_window(window);
  const int r = window / 2;
  if (r == 0) return in;
  Plane horizontal = rows_extreme(in, r, identity, op);
  return transpose(rows_extreme(transpose(horizontal), r, identity, op));
}

Plane rows_box(const Plane& in, int radius) {
  const int w = in.width();
  const int k = 2 * radius + 1;
  Plane out(w, in.height());
#pragma omp parallel
  {
    std::vector<double> prefix(static_cast<std::size_t>(w) + 2 * radius + 1);
#pragma omp for schedule(static)
    for (int y = 0; y < in.height(); ++y) {
      const auto src = in.row(y);
      auto dst = out.row(y);
      prefix[0] = 0.0;
      for (int i = 0; i < w + 2 * radius; ++i) {
        const int s = std::clamp(i - radius, 0, w - 1);
        prefix[i + 1] = prefix[i] + src[s];
      }
      for (int x = 0; x < w; ++x) dst[x] = (prefix[x + k] - prefix[x]) / k;
    }
  }
  return out;
}

}  // namespace

Plane max_filter(const Plane& in, int window) {
  return extreme_filter(in, window, -std::numeric_limits<double>::infinity(),
                        [](double a, double b) { return a > b ? a : b; });
}

Plane min_filter(const Plane& in, int window) {
  return extreme_filter(in, window, std::numeric_limits<double>::infinity(),
                        [](double a, double b) { return a < b ? a : b; });
}

Plane box_blur(const Plane& in, int window) {
  check_window(window);
  const int r = window / 2;
  if (r == 0) return in;
  return transpose(rows_box(transpose(rows_box(in, r)), r));
}

Plane separable_valid(const Plane& in, std::span<const double> taps) {
  const int k = static_cast<int>(taps.size());
  if (k < 1 || k > in.width() || k > in.height()) {
    throw std::invalid_argument("separable_valid: kernel larger than plane");
  }
  const int ow = in.width() - k + 1, oh = in.height() - k + 1;
  Plane horizontal(ow, in.height());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < in.height(); ++y) {
    const auto src = in.row(y);
    auto dst = horizontal.row(y);
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += taps[t] * src[x + t];
      dst[x] = acc;
    }
  }
  Plane out(ow, oh, 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < oh; ++y) {
    auto dst = out.row(y);
    for (int t = 0; t < k; ++t) {
      const auto src = horizontal.row(y + t);
      const double wt = taps[t];
      for (int x = 0; x < ow; ++x) dst[x] += wt * src[x];
    }
  }
  return out;
}

Plane downsample2(const Plane& in) {
  const int ow = in.width() / 2, oh = in.height() / 2;
  if (ow < 1 || oh < 1) throw std::invalid_argument("downsample2: plane too small");
  Plane out(ow, oh);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < oh; ++y) {
    const auto a = in.row(2 * y);
    const auto b = in.row(2 * y + 1);
    auto dst = out.row(y);
    for (int x = 0; x < ow; ++x) {
      dst[x] = (a[2 * x] + a[2 * x + 1] + b[2 * x] + b[2 * x + 1]) * 0.25;
    }
  }
  return out;
}

Plane laplacian(const Plane& in) {
  const int w = in.width(), h = in.height();
  Plane out(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const auto up = in.row(std::max(y - 1, 0));
    const auto mid = in.row(y);
    const auto down = in.row(std::min(y + 1, h - 1));
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      const double left = mid[std::max(x - 1, 0)];
      const double right = mid[std::min(x + 1, w - 1)];
      dst[x] = up[x] + down[x] + left + right - 4.0 * mid[x];
    }
  }
  return out;
}

double laplacian_abs_sum(const Plane& in) {
  const int w = in.width(), h = in.height();
  std::vector<double> partial(h, 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const auto up = in.row(std::max(y - 1, 0));
    const auto mid = in.row(y);
    const auto down = in.row(std::min(y + 1, h - 1));
    double acc = 0.0;
    for (int x = 0; x < w; ++x) {
      const double left = mid[std::max(x - 1, 0)];
      const double right = mid[std::min(x + 1, w - 1)];
      acc += std::abs(up[x] + down[x] + left + right - 4.0 * mid[x]);
    }
    partial[y] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

Plane multiply(const Plane& a, const Plane& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ShapeError("multiply: plane size mismatch");
  }
  Plane out(a.width(), a.height());
  const auto pa = a.data(), pb = b.data();
  auto po = out.data();
  const auto n = static_cast<std::ptrdiff_t>(po.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
  return out;
}

double sum(const Plane& in) {
  std::vector<double> partial(in.height(), 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < in.height(); ++y) {
    double acc = 0.0;
    for (double v : in.row(y)) acc += v;
    partial[y] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

std::vector<double> gaussian_taps(int size, double sigma) {
  check_window(size);
  std::vector<double> taps(size);
  const int r = size / 2;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - r;
    taps[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

}  // namespace docenh::kernels
