#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "docenh/enhance.hpp"
#include "docenh/image.hpp"
#include "docenh/rng.hpp"

namespace docenh {

/// Ordered set of lighting surfaces with a provenance label each.
class SurfaceBank {
 public:
  void add(std::string id, IlluminationSurface surface);

  /// Every PNG/PGM/PPM file in `dir`, sorted by file name; ids are the file
  /// names. Loaded gains are clamped to [0.01, 1].
  static SurfaceBank load_directory(const std::filesystem::path& dir);

  std::size_t size() const noexcept { return surfaces_.size(); }
  bool empty() const noexcept { return surfaces_.empty(); }
  const IlluminationSurface& surface(std::size_t i) const { return surfaces_.at(i); }
  const std::string& id(std::size_t i) const { return ids_.at(i); }

 private:
  std::vector<IlluminationSurface> surfaces_;
  std::vector<std::string> ids_;
};

struct AugmentConfig {
  int crop_size = 256;
  double energy_threshold = 1e6;  // 8-bit luminance units
  int crops_per_page = 8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CropPair {
  Region region;
  Image raw_crop;
  Image clean_crop;
  double energy = 0.0;
};

/// L = clamp(raw / max(enhanced, 0.05), 0.01, 1). Pixels whose enhanced value
/// is below 0.05 carry no lighting information and take the value of the
/// nearest valid pixel in the same row and channel (ties go left); a row
/// with no valid pixel gets gain 1.
IlluminationSurface extract_surface(const Image& raw, const Image& enhanced);

/// out = clean * surface. Shapes must match exactly.
Image apply_surface(const Image& clean, const IlluminationSurface& surface);

/// Bilinear resize, re-clamped to [0.01, 1].
IlluminationSurface resample_surface(const IlluminationSurface& surface, int width, int height);

/// Repeats a 1-channel surface into 3 channels or reduces 3 to 1 by luminance.
IlluminationSurface match_channels(const IlluminationSurface& surface, int channels);

/// Sum of |Laplacian| over the luminance scaled to 0..255, replicated borders.
double laplacian_energy(const Image& image);

/// The region sequence sample_crops draws for a `width` x `height` page:
/// `count` uniformly placed squares of side `crop_size`.
std::vector<Region> draw_regions(int width, int height, const AugmentConfig& cfg,
                                 std::size_t count);

/// Draws aligned regions from the seeded sequence, keeps a pair when the
/// clean crop's energy reaches the threshold, and stops after
/// crops_per_page kept pairs or 50 * crops_per_page draws.
std::vector<CropPair> sample_crops(const Image& raw, const Image& clean, const AugmentConfig& cfg);

/// Everything needed to regenerate one augmented pair bit-exactly.
struct Provenance {
  std::size_t page = 0;
  Region region;
  std::size_t surface = 0;
  std::string surface_id;
  Region surface_region;
  bool surface_resampled = false;  // surface was resized to crop_size x crop_size first
  std::uint64_t seed = 0;          // per-page seed

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct AugmentedPair {
  Image input;   // clean crop under a bank lighting window
  Image target;  // clean crop
  Provenance provenance;
};

/// Streams (input, target) pairs over all pages. For every kept crop a bank
/// surface and a same-size window of it are drawn; surfaces smaller than the
/// crop are resampled to crop size. Not thread-safe; use one stream per
/// thread with distinct seeds.
class AugmentedStream {
 public:
  AugmentedStream(const std::vector<Image>& clean_pages, const SurfaceBank& bank,
                  AugmentConfig cfg);

  std::optional<AugmentedPair> next();

 private:
  void load_page();

  const std::vector<Image>& pages_;
  const SurfaceBank& bank_;
  AugmentConfig cfg_;
  std::size_t page_ = 0;
  std::vector<CropPair> crops_;
  std::size_t crop_ = 0;
  std::optional<Rng> pick_rng_;
  std::uint64_t page_seed_ = 0;
};

AugmentedStream make_augmented_set(const std::vector<Image>& clean_pages, const SurfaceBank& bank,
                                   const AugmentConfig& cfg);

/// Rebuilds the input image of a pair from its provenance record.
Image replay_provenance(const Provenance& record, const std::vector<Image>& clean_pages,
                        const SurfaceBank& bank, int crop_size);

/// One line of structured text per record.
std::string provenance_record(const Provenance& record);
Provenance parse_provenance_record(const std::string& line);

}  // namespace docenh
