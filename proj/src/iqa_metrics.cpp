#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>

#include "docenh/image_io.hpp"
#include "docenh/iqa.hpp"
#include "docenh/kernels.hpp"
#include "docenh/process.hpp"

namespace docenh {

namespace {

constexpr double kPeak = 255.0;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::array<double, 5> kScaleWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": images differ in shape (" +
                     std::to_string(a.width()) + "x" + std::to_string(a.height()) + "x" +
                     std::to_string(a.channels()) + " vs " + std::to_string(b.width()) + "x" +
                     std::to_string(b.height()) + "x" + std::to_string(b.channels()) + ")");
  }
}

double squared_error_sum(const Image& a, const Image& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = (a.data()[i] - b.data()[i]) * kPeak;
    acc += d * d;
  }
  return acc;
}

struct ScaleTerms {
  double cs;
  double ssim;
};

ScaleTerms ssim_terms(const Plane& x, const Plane& y, std::span<const double> taps) {
  constexpr double c1 = (0.01 * kPeak) * (0.01 * kPeak);
  constexpr double c2 = (0.03 * kPeak) * (0.03 * kPeak);
  const Plane mu_x = kernels::separable_valid(x, taps);
  const Plane mu_y = kernels::separable_valid(y, taps);
  const Plane e_xx = kernels::separable_valid(kernels::multiply(x, x), taps);
  const Plane e_yy = kernels::separable_valid(kernels::multiply(y, y), taps);
  const Plane e_xy = kernels::separable_valid(kernels::multiply(x, y), taps);

  const std::size_t n = mu_x.size();
  std::vector<double> cs_row(mu_x.height(), 0.0), ssim_row(mu_x.height(), 0.0);
  const int w = mu_x.width();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < mu_x.height(); ++r) {
    double cs_acc = 0.0, ssim_acc = 0.0;
    for (int c = 0; c < w; ++c) {
      const double mx = mu_x.at(c, r), my = mu_y.at(c, r);
      const double vx = e_xx.at(c, r) - mx * mx;
      const double vy = e_yy.at(c, r) - my * my;
      const double cov = e_xy.at(c, r) - mx * my;
      const double lum = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
      const double cs = (2.0 * cov + c2) / (vx + vy + c2);
      cs_acc += cs;
      ssim_acc += lum * cs;
    }
    cs_row[r] = cs_acc;
    ssim_row[r] = ssim_acc;
  }
  double cs_sum = 0.0, ssim_sum = 0.0;
  for (int r = 0; r < mu_x.height(); ++r) {
    cs_sum += cs_row[r];
    ssim_sum += ssim_row[r];
  }
  return {cs_sum / static_cast<double>(n), ssim_sum / static_cast<double>(n)};
}

}  // namespace

PixelStats pixel_stats(const Image& reference, const Image& test) {
  require_same_shape(reference, test, "pixel_stats");
  const auto n = static_cast<double>(reference.data().size());
  double abs_acc = 0.0, ref_power = 0.0;
  for (std::size_t i = 0; i < reference.data().size(); ++i) {
    const double r = reference.data()[i] * kPeak;
    abs_acc += std::abs(r - test.data()[i] * kPeak);
    ref_power += r * r;
  }
  PixelStats s;
  s.mse = squared_error_sum(reference, test) / n;
  s.mae = abs_acc / n;
  s.rmse = std::sqrt(s.mse);
  s.snr = s.mse == 0.0 ? kInf : 10.0 * std::log10((ref_power / n) / s.mse);
  return s;
}

double psnr(const Image& reference, const Image& test) {
  require_same_shape(reference, test, "psnr");
  const double mse = squared_error_sum(reference, test) / static_cast<double>(reference.data().size());
  if (mse == 0.0) return kInf;
  return 10.0 * std::log10(kPeak * kPeak / mse);
}

int ms_ssim_scales(int width, int height) {
  int side = std::min(width, height);
  int scales = 0;
  while (scales < static_cast<int>(kScaleWeights.size()) && side >= kWindow) {
    ++scales;
    side /= 2;
  }
  return std::max(scales, 1);
}

double ms_ssim(const Image& reference, const Image& test) {
  require_same_shape(reference, test, "ms_ssim");
  if (reference.width() <= 1 || reference.height() <= 1) {
    throw MetricError("ms_ssim: input must be larger than 1x1 pixel in both dimensions");
  }
  Plane x = to_luminance(reference);
  Plane y = to_luminance(test);
  for (double& v : x.data()) v *= kPeak;
  for (double& v : y.data()) v *= kPeak;

  const int scales = ms_ssim_scales(reference.width(), reference.height());
  int window = kWindow;
  const int side = std::min(reference.width(), reference.height());
  if (side < kWindow) window = side % 2 == 1 ? side : side - 1;
  const std::vector<double> taps = kernels::gaussian_taps(window, kSigma);

  double weight_sum = 0.0;
  for (int s = 0; s < scales; ++s) weight_sum += kScaleWeights[s];

  double score = 1.0;
  for (int s = 0; s < scales; ++s) {
    if (s > 0) {
      x = kernels::downsample2(x);
      y = kernels::downsample2(y);
    }
    const ScaleTerms t = ssim_terms(x, y, taps);
    const double term = std::max(s + 1 == scales ? t.ssim : t.cs, 0.0);
    score *= std::pow(term, kScaleWeights[s] / weight_sum);
  }
  return score;
}

bool is_better(const MetricDescriptor& metric, const MetricScore& a, const MetricScore& b) {
  if (a.metric != metric.id || b.metric != metric.id) {
    throw MetricError("is_better: scores for '" + a.metric + "' and '" + b.metric +
                      "' compared under metric '" + metric.id + "'");
  }
  if (std::isnan(a.value) || std::isnan(b.value)) return false;
  return metric.polarity == Polarity::higher_is_better ? a.value > b.value : a.value < b.value;
}

std::string to_string(Polarity polarity) {
  return polarity == Polarity::higher_is_better ? "higher" : "lower";
}

Polarity parse_polarity(const std::string& text) {
  if (text == "higher" || text == "higher-is-better" || text == "higher_is_better") {
    return Polarity::higher_is_better;
  }
  if (text == "lower" || text == "lower-is-better" || text == "lower_is_better") {
    return Polarity::lower_is_better;
  }
  throw std::invalid_argument("unknown metric polarity '" + text + "' (use higher or lower)");
}

std::string MetricDescriptor::display_name() const {
  if (!label.empty()) return label;
  std::string out = id;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  return out;
}

bool is_builtin_metric(const std::string& id) {
  return id == "psnr" || id == "ms-ssim" || id == "mse" || id == "mae" || id == "rmse" ||
         id == "snr";
}

MetricRegistry::MetricRegistry() {
  using P = Polarity;
  metrics_ = {
      {"psnr", "PSNR", P::higher_is_better, std::nullopt},
      {"ms-ssim", "MS-SSIM", P::higher_is_better, std::nullopt},
      {"mse", "MSE", P::lower_is_better, std::nullopt},
      {"mae", "MAE", P::lower_is_better, std::nullopt},
      {"rmse", "RMSE", P::lower_is_better, std::nullopt},
      {"snr", "SNR", P::higher_is_better, std::nullopt},
  };
}

void MetricRegistry::add(MetricDescriptor descriptor) {
  if (descriptor.id.empty()) throw std::invalid_argument("metric id must not be empty");
  if (contains(descriptor.id)) {
    throw std::invalid_argument("duplicate metric id '" + descriptor.id + "'");
  }
  if (!descriptor.external) {
    throw std::invalid_argument("metric '" + descriptor.id + "' is not builtin and has no command");
  }
  metrics_.push_back(std::move(descriptor));
}

bool MetricRegistry::contains(const std::string& id) const {
  return std::any_of(metrics_.begin(), metrics_.end(),
                     [&](const MetricDescriptor& m) { return m.id == id; });
}

const MetricDescriptor& MetricRegistry::get(const std::string& id) const {
  for (const auto& m : metrics_) {
    if (m.id == id) return m;
  }
  throw std::invalid_argument("unknown metric '" + id + "'");
}

std::vector<MetricDescriptor> MetricRegistry::select(const std::string& csv) const {
  std::vector<MetricDescriptor> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = std::min(csv.find(',', pos), csv.size());
    std::string id = csv.substr(pos, comma - pos);
    id.erase(0, id.find_first_not_of(" \t"));
    id.erase(id.find_last_not_of(" \t") + 1);
    if (!id.empty()) {
      const auto& m = get(id);
      if (std::none_of(out.begin(), out.end(), [&](const auto& o) { return o.id == id; })) {
        out.push_back(m);
      }
    }
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty metric list");
  return out;
}

void materialize(EvalImage& img, const std::filesystem::path& scratch, const std::string& name) {
  if (!img.path.empty()) return;
  std::filesystem::create_directories(scratch);
  img.path = scratch / (name + ".png");
  save_image(img.image, img.path);
}

MetricScore evaluate_metric(const MetricDescriptor& metric, const EvalImage& reference,
                            const EvalImage& test, ProcessLimiter* limiter) {
  if (metric.is_external()) {
    if (reference.path.empty() || test.path.empty()) {
      throw MetricError("external metric '" + metric.id + "' needs on-disk images");
    }
    if (limiter != nullptr) {
      auto slot = limiter->acquire();
      return external_metric(metric, reference.path, test.path);
    }
    return external_metric(metric, reference.path, test.path);
  }
  const Image& r = reference.image;
  const Image& t = test.image;
  double value;
  if (metric.id == "psnr") {
    value = psnr(r, t);
  } else if (metric.id == "ms-ssim") {
    value = ms_ssim(r, t);
  } else if (metric.id == "mse" || metric.id == "mae" || metric.id == "rmse" ||
             metric.id == "snr") {
    const PixelStats s = pixel_stats(r, t);
    value = metric.id == "mse" ? s.mse : metric.id == "mae" ? s.mae : metric.id == "rmse" ? s.rmse : s.snr;
  } else {
    throw MetricError("metric '" + metric.id + "' is neither builtin nor external");
  }
  return {metric.id, value};
}

Image white_control(const Image& reference) {
  return Image::filled(reference.width(), reference.height(), reference.channels(), 1.0);
}

}  // namespace docenh
