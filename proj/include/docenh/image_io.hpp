#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "docenh/image.hpp"

namespace docenh {

class ImageIoError : public std::runtime_error {
 public:
  enum class Kind { missing_file, unsupported_format, corrupt_stream, unwritable };

  ImageIoError(Kind kind, std::filesystem::path path, const std::string& detail);

  Kind kind() const noexcept { return kind_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  Kind kind_;
  std::filesystem::path path_;
};

/// Reads an 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette) or binary
/// PGM/PPM. Values v map to v/255; alpha is dropped.
Image load_image(const std::filesystem::path& path);

/// Decodes an in-memory PNG/PGM/PPM stream. `origin` only labels errors.
Image decode_image(std::span<const std::uint8_t> bytes,
                   const std::filesystem::path& origin = "<memory>");

/// Writes by extension: .png, .ppm or .pgm. Encoding rounds v*255 half away
/// from zero.
void save_image(const Image& image, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Image& image);

}  // namespace docenh
