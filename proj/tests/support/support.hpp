#pragma once

// Shared fixtures and brute-force oracles for the test binaries.

#include <stdlib.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "docenh/augment.hpp"
#include "docenh/enhance.hpp"
#include "docenh/harness.hpp"
#include "docenh/image.hpp"
#include "docenh/image_io.hpp"
#include "docenh/iqa.hpp"
#include "docenh/rng.hpp"
#include "docenh/synth.hpp"

namespace testsupport {

namespace fs = std::filesystem;
using namespace docenh;

class TempDir {
 public:
  TempDir() {
    std::string templ = (fs::temp_directory_path() / "docenh-test-XXXXXX").string();
    if (!mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline Image make_image(int w, int h, int c, const std::function<double(int, int, int)>& f) {
  std::vector<double> data(static_cast<std::size_t>(w) * h * c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) data[(static_cast<std::size_t>(y) * w + x) * c + ch] = f(x, y, ch);
  return Image(w, h, c, std::move(data));
}

inline Image random_image(int w, int h, int c, Rng& rng) {
  return make_image(w, h, c, [&](int, int, int) { return rng.uniform(); });
}

inline void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Shell script in `dir`, made executable.
inline fs::path write_script(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir / name;
  write_file(p, "#!/bin/sh\n" + body);
  fs::permissions(p, fs::perms::owner_all, fs::perm_options::add);
  return p;
}

// --- synthetic shaded corpus ----------------------------------------------

struct ShadedPage {
  Image clean;
  IlluminationSurface surface;
  Image raw;  // quantize8(clean * surface)
};

inline ShadedPage shaded_page(std::uint64_t seed, std::size_t index,
                              const synth::PageOptions& opts = {}) {
  Rng rng(mix_seed(seed, index));
  ShadedPage p;
  p.clean = synth::text_page(opts, rng);
  p.surface = synth::smooth_surface(opts.width, opts.height, opts.channels, rng, 0.5, 1.0);
  p.raw = quantize8(apply_surface(p.clean, p.surface));
  return p;
}

struct Corpus {
  Manifest manifest;
  fs::path manifest_path;
  std::vector<ShadedPage> pages;
};

/// Writes reference/raw PNGs and a manifest. With `with_outputs`, the
/// classical engine's results are stored too and listed under "classical".
inline Corpus write_corpus(const fs::path& dir, std::size_t n, std::uint64_t seed,
                           const synth::PageOptions& opts = {}, bool with_outputs = false) {
  Corpus c;
  fs::create_directories(dir / "ref");
  fs::create_directories(dir / "raw");
  std::string lines;
  for (std::size_t i = 0; i < n; ++i) {
    ShadedPage p = shaded_page(seed, i, opts);
    char id[32];
    std::snprintf(id, sizeof id, "page-%03zu", i);
    ManifestEntry e{id, dir / "raw" / (std::string(id) + ".png"),
                    dir / "ref" / (std::string(id) + ".png"), {}};
    save_image(p.raw, e.raw);
    save_image(p.clean, e.reference);
    if (with_outputs) {
      fs::create_directories(dir / "out");
      const fs::path out = dir / "out" / (std::string(id) + ".png");
      save_image(enhance_document(p.raw).enhanced, out);
      e.enhanced["classical"] = out;
    }
    c.manifest.entries.push_back(e);
    c.pages.push_back(std::move(p));
  }
  c.manifest_path = dir / "manifest.jsonl";
  write_manifest(c.manifest, c.manifest_path);
  return c;
}

// --- MS-SSIM noise fixtures -----------------------------------------------

inline constexpr std::uint64_t kNoiseFixtureSeed = 20230906;
inline constexpr std::array<double, 3> kNoiseSigmas{5.0, 10.0, 20.0};

struct NoisyPair {
  int page;
  double sigma;  // 8-bit units
  Image clean;
  Image noisy;
};

/// Ten 256x256 grey pages at 8-bit levels with three noise levels each.
inline std::vector<NoisyPair> noisy_pages() {
  std::vector<NoisyPair> out;
  synth::PageOptions opts;
  opts.width = opts.height = 256;
  opts.channels = 1;
  for (int page = 0; page < 10; ++page) {
    Rng rng(mix_seed(kNoiseFixtureSeed, page));
    const Image clean = quantize8(synth::text_page(opts, rng));
    for (std::size_t k = 0; k < kNoiseSigmas.size(); ++k) {
      Rng noise(mix_seed(kNoiseFixtureSeed, 1000 + page * 10 + k));
      out.push_back({page, kNoiseSigmas[k], clean,
                     synth::add_gaussian_noise(clean, kNoiseSigmas[k] / 255.0, noise)});
    }
  }
  return out;
}

// --- brute-force oracles --------------------------------------------------

/// Direct 3x3 convolution with clamped indexing, on luminance * 255.
inline double brute_laplacian_energy(const Image& img) {
  const Plane lum = to_luminance(img);
  const int w = lum.width(), h = lum.height();
  auto px = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return lum.at(x, y) * 255.0;
  };
  double total = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      total += std::abs(px(x - 1, y) + px(x + 1, y) + px(x, y - 1) + px(x, y + 1) - 4.0 * px(x, y));
  return total;
}

/// Full 2-D windowed MS-SSIM, one window position at a time. Handles inputs
/// whose every used scale has sides of at least 11.
inline double brute_ms_ssim(const Image& a, const Image& b) {
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5, C1 = (0.01 * 255) * (0.01 * 255), C2 = (0.03 * 255) * (0.03 * 255);
  const std::array<double, 5> weights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  double kernel[kWin][kWin], ksum = 0.0;
  for (int j = 0; j < kWin; ++j)
    for (int i = 0; i < kWin; ++i) {
      const double dx = i - kWin / 2, dy = j - kWin / 2;
      kernel[j][i] = std::exp(-(dx * dx + dy * dy) / (2 * kSigma * kSigma));
      ksum += kernel[j][i];
    }
  for (auto& row : kernel)
    for (double& k : row) k /= ksum;

  auto scaled = [](const Image& img) {
    std::vector<std::vector<double>> p(img.height(), std::vector<double>(img.width()));
    const Plane lum = to_luminance(img);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) p[y][x] = lum.at(x, y) * 255.0;
    return p;
  };
  auto half = [](const std::vector<std::vector<double>>& p) {
    const std::size_t h = p.size() / 2, w = p[0].size() / 2;
    std::vector<std::vector<double>> q(h, std::vector<double>(w));
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        q[y][x] = (p[2 * y][2 * x] + p[2 * y][2 * x + 1] + p[2 * y + 1][2 * x] + p[2 * y + 1][2 * x + 1]) / 4;
    return q;
  };
  auto x = scaled(a), y = scaled(b);
  int scales = 0;
  for (int w = a.width(), h = a.height(); scales < 5 && w >= kWin && h >= kWin; w /= 2, h /= 2) ++scales;
  double wsum = 0.0;
  for (int s = 0; s < scales; ++s) wsum += weights[s];

  double result = 1.0;
  for (int s = 0; s < scales; ++s) {
    const int h = static_cast<int>(x.size()), w = static_cast<int>(x[0].size());
    double cs_acc = 0.0, ssim_acc = 0.0;
    int count = 0;
    for (int oy = 0; oy + kWin <= h; ++oy)
      for (int ox = 0; ox + kWin <= w; ++ox) {
        double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
        for (int j = 0; j < kWin; ++j)
          for (int i = 0; i < kWin; ++i) {
            const double k = kernel[j][i], u = x[oy + j][ox + i], v = y[oy + j][ox + i];
            mx += k * u;
            my += k * v;
            xx += k * u * u;
            yy += k * v * v;
            xy += k * u * v;
          }
        const double vx = xx - mx * mx, vy = yy - my * my, cov = xy - mx * my;
        const double cs = (2 * cov + C2) / (vx + vy + C2);
        const double lum = (2 * mx * my + C1) / (mx * mx + my * my + C1);
        cs_acc += cs;
        ssim_acc += lum * cs;
        ++count;
      }
    const double term = s + 1 < scales ? cs_acc / count : ssim_acc / count;
    result *= std::pow(std::max(term, 0.0), weights[s] / wsum);
    if (s + 1 < scales) {
      x = half(x);
      y = half(y);
    }
  }
  return result;
}

struct BruteGateRow {
  int raw = 0;
  int white = 0;
  int scored = 0;
};

/// Per-triple recomputation of the raw/white counts with plain comparisons.
inline BruteGateRow brute_gate(const std::vector<EvalTriple>& triples,
                               const std::function<double(const Image&, const Image&)>& score,
                               bool higher_is_better) {
  BruteGateRow row;
  for (const auto& t : triples) {
    const double r = score(t.reference.image, t.raw.image);
    const double e = score(t.reference.image, t.enhanced.image);
    const double w = score(t.reference.image, t.white.image);
    ++row.scored;
    if (higher_is_better) {
      row.raw += r > e;
      row.white += w > r;
    } else {
      row.raw += r < e;
      row.white += w < r;
    }
  }
  return row;
}

}  // namespace testsupport
