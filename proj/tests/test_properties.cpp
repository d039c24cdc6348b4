#include <doctest.h>

#include <algorithm>

#include "support.hpp"

using namespace docenh;
using testsupport::make_image;
using testsupport::TempDir;

// Seeded randomized checks of invariants that hold for any input.

TEST_CASE("tone map is monotone and bounded") {
  Rng rng(100);
  for (int trial = 0; trial < 50; ++trial) {
    const double b = rng.uniform(0.0, 0.4);
    const ToneParams t{b, rng.uniform(b + 0.05, 1.0), rng.uniform(0.3, 3.0)};
    std::vector<double> xs(64);
    for (double& x : xs) x = rng.uniform();
    std::sort(xs.begin(), xs.end());
    const Image out = tone_map(Image(64, 1, 1, xs), t);
    for (int i = 0; i < 64; ++i) {
      CHECK(out.at(i, 0, 0) >= 0.0);
      CHECK(out.at(i, 0, 0) <= 1.0);
      if (i > 0) CHECK(out.at(i, 0, 0) >= out.at(i - 1, 0, 0));
    }
  }
}

TEST_CASE("retinex division is a clipped ratio") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const Image raw = testsupport::random_image(13, 9, 3, rng);
    const auto surface = synth::smooth_surface(13, 9, 3, rng, 0.01, 1.0);
    const Image out = retinex_divide(raw, surface);
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 13; ++x)
        for (int c = 0; c < 3; ++c) {
          CHECK(out.at(x, y, c) == doctest::Approx(std::min(1.0, raw.at(x, y, c) / surface.at(x, y, c))));
          CHECK(out.at(x, y, c) >= raw.at(x, y, c) - 1e-15);
        }
  }
}

TEST_CASE("estimated illumination bounds and scaling") {
  Rng rng(102);
  for (int trial = 0; trial < 5; ++trial) {
    synth::PageOptions o;
    o.width = 120;
    o.height = 100;
    const Image page = synth::text_page(o, rng);
    const auto l = estimate_illumination(page);
    for (double v : l.gains().data()) {
      CHECK(v >= IlluminationSurface::kMinGain);
      CHECK(v <= 1.0);
    }
    const double k = rng.uniform(0.3, 0.9);
    const Image dim = make_image(120, 100, 3, [&](int x, int y, int c) { return k * page.at(x, y, c); });
    const auto ld = estimate_illumination(dim);
    for (std::size_t i = 0; i < l.gains().data().size(); ++i) {
      const double expect = std::max(k * l.gains().data()[i], IlluminationSurface::kMinGain);
      CHECK(ld.gains().data()[i] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("apply then extract recovers random surfaces") {
  Rng rng(103);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 8 + static_cast<int>(rng.uniform_int(0, 40));
    const int h = 8 + static_cast<int>(rng.uniform_int(0, 40));
    const Image clean = make_image(w, h, 3, [&](int, int, int) { return rng.uniform(0.05, 1.0); });
    const auto surface = synth::smooth_surface(w, h, 3, rng, 0.5, 1.0);
    const auto got = extract_surface(apply_surface(clean, surface), clean);
    CHECK(max_abs_difference(got.gains(), surface.gains()) <= 1e-12);
  }
}

TEST_CASE("laplacian energy ignores offsets and scales linearly") {
  Rng rng(104);
  for (int trial = 0; trial < 10; ++trial) {
    const Image img = make_image(40, 30, 1, [&](int, int, int) { return rng.uniform(0.2, 0.6); });
    const double base = laplacian_energy(img);
    const double off = rng.uniform(-0.2, 0.3);
    const double k = rng.uniform(0.5, 1.6);
    const Image moved = make_image(40, 30, 1, [&](int x, int y, int) { return img.at(x, y, 0) + off; });
    const Image scaled = make_image(40, 30, 1, [&](int x, int y, int) { return k * img.at(x, y, 0); });
    CHECK(laplacian_energy(moved) == doctest::Approx(base).epsilon(1e-9));
    CHECK(laplacian_energy(scaled) == doctest::Approx(k * base).epsilon(1e-9));
  }
}

TEST_CASE("full-reference scores are symmetric and bounded") {
  Rng rng(105);
  for (int trial = 0; trial < 6; ++trial) {
    const Image a = testsupport::random_image(40, 36, 1, rng);
    const Image b = make_image(40, 36, 1, [&](int x, int y, int) {
      return std::clamp(a.at(x, y, 0) + rng.normal() * 0.1, 0.0, 1.0);
    });
    CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)));
    const double s = ms_ssim(a, b);
    CHECK(s == doctest::Approx(ms_ssim(b, a)).epsilon(1e-12));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(ms_ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pixel_stats(a, b).mse > 0.0);
  }
}

TEST_CASE("gate counts do not depend on triple order") {
  Rng rng(106);
  std::vector<EvalTriple> triples;
  for (int i = 0; i < 12; ++i) {
    const Image ref = quantize8(testsupport::random_image(24, 24, 1, rng));
    auto noisy = [&](double sigma) {
      return quantize8(make_image(24, 24, 1, [&](int x, int y, int) {
        return std::clamp(ref.at(x, y, 0) + sigma * rng.normal(), 0.0, 1.0);
      }));
    };
    triples.push_back({"t" + std::to_string(i), {ref, {}}, {noisy(0.2), {}}, {noisy(rng.uniform(0.05, 0.3)), {}},
                       {white_control(ref), {}}});
  }
  const MetricRegistry reg;
  const std::vector<MetricDescriptor> metrics{reg.get("psnr"), reg.get("mae"), reg.get("ms-ssim")};
  const GateReport a = gate_metrics(triples, metrics);
  std::reverse(triples.begin(), triples.end());
  const GateReport b = gate_metrics(triples, metrics, {3, 4});
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].raw_error == b.rows[i].raw_error);
    CHECK(a.rows[i].white_error == b.rows[i].white_error);
    CHECK(a.rows[i].total == a.rows[i].raw_error + a.rows[i].white_error);
  }
}

TEST_CASE("sampled crops lie inside the page and clear the threshold") {
  Rng rng(107);
  for (int trial = 0; trial < 4; ++trial) {
    synth::PageOptions o;
    o.width = 300 + static_cast<int>(rng.uniform_int(0, 200));
    o.height = 260 + static_cast<int>(rng.uniform_int(0, 200));
    const Image page = synth::text_page(o, rng);
    AugmentConfig cfg;
    cfg.seed = rng.next();
    cfg.crops_per_page = 5;
    for (const auto& c : sample_crops(page, page, cfg)) {
      CHECK(c.region.x >= 0);
      CHECK(c.region.y >= 0);
      CHECK(c.region.x + c.region.size <= o.width);
      CHECK(c.region.y + c.region.size <= o.height);
      CHECK(c.energy >= cfg.energy_threshold);
      CHECK(c.energy == laplacian_energy(c.clean_crop));
    }
  }
}

TEST_CASE("8-bit images survive a PNG roundtrip") {
  TempDir dir;
  Rng rng(108);
  for (int channels : {1, 3}) {
    const Image img = quantize8(testsupport::random_image(17, 11, channels, rng));
    save_image(img, dir / "x.png");
    CHECK(load_image(dir / "x.png") == img);
  }
}
