#include "docenh/augment.hpp"

#include <algorithm>
#include <cctype>
#include <json.hpp>
#include <string>

#include "docenh/image_io.hpp"
#include "docenh/kernels.hpp"

namespace docenh {

namespace {

constexpr double kMinEnhanced = 0.05;
constexpr int kAttemptsPerCrop = 50;
constexpr std::uint64_t kSurfacePickStream = 0x5eed;

nlohmann::json region_json(const Region& r) { return nlohmann::json::array({r.x, r.y, r.size}); }

Region region_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("region must be [x, y, size]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

// Surface window used for one pair, after channel matching and resampling.
IlluminationSurface surface_window(const SurfaceBank& bank, std::size_t index, int channels,
                                   int crop_size, bool resampled, Region region) {
  IlluminationSurface s = match_channels(bank.surface(index), channels);
  if (resampled) s = resample_surface(s, crop_size, crop_size);
  return IlluminationSurface(crop(s.gains(), region));
}

}  // namespace

void SurfaceBank::add(std::string id, IlluminationSurface surface) {
  ids_.push_back(std::move(id));
  surfaces_.push_back(std::move(surface));
}

SurfaceBank SurfaceBank::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("surface bank directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (ext == ".png" || ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  SurfaceBank bank;
  for (const auto& f : files) {
    bank.add(f.filename().string(), IlluminationSurface::clamped(load_image(f)));
  }
  return bank;
}

void AugmentConfig::validate() const {
  if (crop_size < 16) throw std::invalid_argument("crop_size must be at least 16");
  if (!(energy_threshold >= 0.0)) throw std::invalid_argument("energy_threshold must be >= 0");
  if (crops_per_page < 0) throw std::invalid_argument("crops_per_page must be >= 0");
}

IlluminationSurface extract_surface(const Image& raw, const Image& enhanced) {
  if (!raw.same_shape(enhanced)) throw ShapeError("extract_surface: raw and enhanced shapes differ");
  const int w = raw.width(), h = raw.height(), c = raw.channels();
  std::vector<double> gains(raw.data().size());
  std::vector<int> left(w), right(w);

  for (int y = 0; y < h; ++y) {
    for (int ch = 0; ch < c; ++ch) {
      auto valid = [&](int x) { return enhanced.at(x, y, ch) >= kMinEnhanced; };
      auto ratio = [&](int x) {
        const double e = std::max(enhanced.at(x, y, ch), kMinEnhanced);
        return std::clamp(raw.at(x, y, ch) / e, IlluminationSurface::kMinGain, 1.0);
      };
      int last = -1;
      for (int x = 0; x < w; ++x) {
        if (valid(x)) last = x;
        left[x] = last;
      }
      last = -1;
      for (int x = w - 1; x >= 0; --x) {
        if (valid(x)) last = x;
        right[x] = last;
      }
      for (int x = 0; x < w; ++x) {
        int source = -1;
        if (left[x] == x) {
          source = x;
        } else if (left[x] >= 0 && right[x] >= 0) {
          source = (x - left[x] <= right[x] - x) ? left[x] : right[x];
        } else {
          source = std::max(left[x], right[x]);
        }
        gains[raw.index(x, y, ch)] = source >= 0 ? ratio(source) : 1.0;
      }
    }
  }
  return IlluminationSurface(Image(w, h, c, std::move(gains)));
}

Image apply_surface(const Image& clean, const IlluminationSurface& surface) {
  if (!clean.same_shape(surface.gains())) {
    throw ShapeError("apply_surface: clean image and surface shapes differ");
  }
  const auto e = clean.data();
  const auto l = surface.gains().data();
  std::vector<double> out(e.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = e[i] * l[i];
  return Image(clean.width(), clean.height(), clean.channels(), std::move(out));
}

IlluminationSurface resample_surface(const IlluminationSurface& surface, int width, int height) {
  if (width == surface.width() && height == surface.height()) return surface;
  return IlluminationSurface::clamped(resize_bilinear(surface.gains(), width, height));
}

IlluminationSurface match_channels(const IlluminationSurface& surface, int channels) {
  if (surface.channels() == channels) return surface;
  return IlluminationSurface::clamped(convert_channels(surface.gains(), channels));
}

double laplacian_energy(const Image& image) {
  Plane lum = to_luminance(image);
  for (double& v : lum.data()) v *= 255.0;
  return kernels::laplacian_abs_sum(lum);
}

std::vector<Region> draw_regions(int width, int height, const AugmentConfig& cfg,
                                 std::size_t count) {
  Rng rng(cfg.seed);
  std::vector<Region> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int x = static_cast<int>(rng.uniform_int(0, width - cfg.crop_size));
    const int y = static_cast<int>(rng.uniform_int(0, height - cfg.crop_size));
    out.push_back({x, y, cfg.crop_size});
  }
  return out;
}

std::vector<CropPair> sample_crops(const Image& raw, const Image& clean, const AugmentConfig& cfg) {
  cfg.validate();
  if (raw.width() != clean.width() || raw.height() != clean.height()) {
    throw ShapeError("sample_crops: raw and clean dimensions differ");
  }
  if (raw.width() < cfg.crop_size || raw.height() < cfg.crop_size) {
    throw std::invalid_argument("sample_crops: image " + std::to_string(raw.width()) + "x" +
                                std::to_string(raw.height()) + " smaller than crop size " +
                                std::to_string(cfg.crop_size));
  }
  const std::size_t attempts = static_cast<std::size_t>(kAttemptsPerCrop) * cfg.crops_per_page;
  std::vector<CropPair> kept;
  for (const Region& region : draw_regions(raw.width(), raw.height(), cfg, attempts)) {
    Image clean_crop = crop(clean, region);
    const double energy = laplacian_energy(clean_crop);
    if (energy < cfg.energy_threshold) continue;
    kept.push_back({region, crop(raw, region), std::move(clean_crop), energy});
    if (kept.size() == static_cast<std::size_t>(cfg.crops_per_page)) break;
  }
  return kept;
}

AugmentedStream::AugmentedStream(const std::vector<Image>& clean_pages, const SurfaceBank& bank,
                                 AugmentConfig cfg)
    : pages_(clean_pages), bank_(bank), cfg_(cfg) {
  cfg_.validate();
  if (bank_.empty()) throw std::invalid_argument("augmentation needs a non-empty surface bank");
}

void AugmentedStream::load_page() {
  page_seed_ = mix_seed(cfg_.seed, page_);
  AugmentConfig page_cfg = cfg_;
  page_cfg.seed = page_seed_;
  const Image& page = pages_[page_];
  crops_ = sample_crops(page, page, page_cfg);
  crop_ = 0;
  pick_rng_.emplace(mix_seed(page_seed_, kSurfacePickStream));
}

std::optional<AugmentedPair> AugmentedStream::next() {
  while (page_ < pages_.size()) {
    if (!pick_rng_) load_page();
    if (crop_ < crops_.size()) {
      const CropPair& pair = crops_[crop_++];
      Rng& rng = *pick_rng_;
      Provenance p;
      p.page = page_;
      p.region = pair.region;
      p.seed = page_seed_;
      p.surface = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(bank_.size()) - 1));
      p.surface_id = bank_.id(p.surface);
      const IlluminationSurface& s = bank_.surface(p.surface);
      const int size = cfg_.crop_size;
      if (s.width() < size || s.height() < size) {
        p.surface_resampled = true;
        p.surface_region = {0, 0, size};
      } else {
        p.surface_region = {static_cast<int>(rng.uniform_int(0, s.width() - size)),
                            static_cast<int>(rng.uniform_int(0, s.height() - size)), size};
      }
      const IlluminationSurface window = surface_window(
          bank_, p.surface, pair.clean_crop.channels(), size, p.surface_resampled, p.surface_region);
      return AugmentedPair{apply_surface(pair.clean_crop, window), pair.clean_crop, std::move(p)};
    }
    ++page_;
    pick_rng_.reset();
  }
  return std::nullopt;
}

AugmentedStream make_augmented_set(const std::vector<Image>& clean_pages, const SurfaceBank& bank,
                                   const AugmentConfig& cfg) {
  return AugmentedStream(clean_pages, bank, cfg);
}

Image replay_provenance(const Provenance& record, const std::vector<Image>& clean_pages,
                        const SurfaceBank& bank, int crop_size) {
  const Image target = crop(clean_pages.at(record.page), record.region);
  const IlluminationSurface window = surface_window(bank, record.surface, target.channels(),
                                                    crop_size, record.surface_resampled,
                                                    record.surface_region);
  return apply_surface(target, window);
}

std::string provenance_record(const Provenance& r) {
  nlohmann::json j;
  j["page"] = r.page;
  j["region"] = region_json(r.region);
  j["surface"] = r.surface;
  j["surface_id"] = r.surface_id;
  j["surface_region"] = region_json(r.surface_region);
  j["surface_resampled"] = r.surface_resampled;
  j["seed"] = r.seed;
  return j.dump();
}

Provenance parse_provenance_record(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  Provenance r;
  r.page = j.at("page").get<std::size_t>();
  r.region = region_from_json(j.at("region"));
  r.surface = j.at("surface").get<std::size_t>();
  r.surface_id = j.at("surface_id").get<std::string>();
  r.surface_region = region_from_json(j.at("surface_region"));
  r.surface_resampled = j.at("surface_resampled").get<bool>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

}  // namespace docenh
