#include "docenh/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

namespace docenh {

namespace {

using Kind = ImageIoError::Kind;

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::missing_file: return "missing file";
    case Kind::unsupported_format: return "unsupported format";
    case Kind::corrupt_stream: return "corrupt stream";
    case Kind::unwritable: return "unwritable path";
  }
  return "image i/o error";
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
}

// ---------------------------------------------------------------------------
// PNG

struct PngErrorSink {
  char message[256] = "libpng error";
};

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof sink->message, "%s", msg);
  std::longjmp(png_jmpbuf(png), 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

struct PngReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_fn(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<PngReader*>(png_get_io_ptr(png));
  if (r->pos + n > r->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, r->bytes.data() + r->pos, n);
  r->pos += n;
}

Image decode_png(std::span<const std::uint8_t> bytes, const std::filesystem::path& origin) {
  PngErrorSink sink;
  PngReader reader{bytes, 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink,
                                           png_error_fn, png_warning_fn);
  if (png == nullptr) throw ImageIoError(Kind::corrupt_stream, origin, "cannot init libpng");
  png_infop info = png_create_info_struct(png);

  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int channels = 0;
  bool sixteen_bit = false;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError(Kind::corrupt_stream, origin, sink.message);
  }
  png_set_read_fn(png, &reader, png_read_fn);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth > 8) {
    sixteen_bit = true;
  } else {
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    channels = png_get_channels(png, info);
    if (channels == 1 || channels == 3) {
      pixels.resize(static_cast<std::size_t>(width) * height * channels);
      rows.resize(height);
      for (png_uint_32 y = 0; y < height; ++y) {
        rows[y] = pixels.data() + static_cast<std::size_t>(y) * width * channels;
      }
      png_read_image(png, rows.data());
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (sixteen_bit) {
    throw ImageIoError(Kind::unsupported_format, origin, "16-bit PNG is not supported");
  }
  if (channels != 1 && channels != 3) {
    throw ImageIoError(Kind::unsupported_format, origin,
                       "unexpected PNG channel layout (" + std::to_string(channels) + ")");
  }
  std::vector<double> data(pixels.size());
  std::transform(pixels.begin(), pixels.end(), data.begin(),
                 [](std::uint8_t v) { return v / 255.0; });
  return Image(static_cast<int>(width), static_cast<int>(height), channels, std::move(data));
}

void png_write_fn(png_structp png, png_bytep in, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + n);
}

void png_flush_fn(png_structp) {}

// ---------------------------------------------------------------------------
// PNM (binary P5 / P6, maxval 255)

struct PnmHeader {
  int channels = 0;
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

PnmHeader parse_pnm_header(std::span<const std::uint8_t> bytes,
                           const std::filesystem::path& origin) {
  PnmHeader h;
  h.channels = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  auto next_int = [&](const char* what) {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw ImageIoError(Kind::corrupt_stream, origin,
                         std::string("malformed PNM header (") + what + ")");
    }
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1'000'000) throw ImageIoError(Kind::corrupt_stream, origin, "PNM header value too large");
    }
    return static_cast<int>(v);
  };
  h.width = next_int("width");
  h.height = next_int("height");
  h.maxval = next_int("maxval");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw ImageIoError(Kind::corrupt_stream, origin, "malformed PNM header");
  }
  h.data_offset = pos + 1;
  return h;
}

Image decode_pnm(std::span<const std::uint8_t> bytes, const std::filesystem::path& origin) {
  const PnmHeader h = parse_pnm_header(bytes, origin);
  if (h.maxval != 255) {
    throw ImageIoError(Kind::unsupported_format, origin,
                       "only 8-bit PNM (maxval 255) is supported, got maxval " +
                           std::to_string(h.maxval));
  }
  if (h.width < 1 || h.height < 1) {
    throw ImageIoError(Kind::corrupt_stream, origin, "PNM has zero dimension");
  }
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height * h.channels;
  if (bytes.size() - h.data_offset < n) {
    throw ImageIoError(Kind::corrupt_stream, origin, "truncated PNM pixel data");
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = bytes[h.data_offset + i] / 255.0;
  return Image(h.width, h.height, h.channels, std::move(data));
}

std::vector<std::uint8_t> encode_pnm(const Image& image, int channels) {
  const std::string header = std::string(channels == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.pixel_count() * channels);
  const auto src = image.data();
  if (channels == image.channels()) {
    for (double v : src) out.push_back(to_byte(v));
  } else {
    for (double v : src) {
      const auto b = to_byte(v);
      out.insert(out.end(), {b, b, b});
    }
  }
  return out;
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

}  // namespace

ImageIoError::ImageIoError(Kind kind, std::filesystem::path path, const std::string& detail)
    : std::runtime_error(std::string(kind_name(kind)) + ": " + path.string() + ": " + detail),
      kind_(kind),
      path_(std::move(path)) {}

Image decode_image(std::span<const std::uint8_t> bytes, const std::filesystem::path& origin) {
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(std::begin(kPngMagic), std::end(kPngMagic), bytes.begin())) {
    return decode_png(bytes, origin);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return decode_pnm(bytes, origin);
  }
  throw ImageIoError(Kind::unsupported_format, origin,
                     "not a PNG or binary PGM/PPM stream");
}

Image load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw ImageIoError(Kind::missing_file, path, "no such file");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError(Kind::missing_file, path, "cannot open for reading");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return decode_image(bytes, path);
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> pixels(image.data().size());
  std::transform(image.data().begin(), image.data().end(), pixels.begin(), to_byte);
  std::vector<png_bytep> rows(image.height());
  const std::size_t stride = static_cast<std::size_t>(image.width()) * image.channels();
  for (int y = 0; y < image.height(); ++y) rows[y] = pixels.data() + y * stride;

  PngErrorSink sink;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink,
                                            png_error_fn, png_warning_fn);
  if (png == nullptr) throw std::runtime_error("cannot init libpng writer");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error(std::string("PNG encode failed: ") + sink.message);
  }
  png_set_write_fn(png, &out, png_write_fn, png_flush_fn);
  png_set_IHDR(png, info, image.width(), image.height(), 8,
               image.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void save_image(const Image& image, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  std::vector<std::uint8_t> bytes;
  if (ext == ".png") {
    bytes = encode_png(image);
  } else if (ext == ".ppm") {
    bytes = encode_pnm(image, 3);
  } else if (ext == ".pgm") {
    if (image.channels() != 1) {
      throw ImageIoError(Kind::unsupported_format, path, "PGM requires a single-channel image");
    }
    bytes = encode_pnm(image, 1);
  } else {
    throw ImageIoError(Kind::unsupported_format, path,
                       "unknown output extension '" + ext + "' (use .png, .ppm or .pgm)");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ImageIoError(Kind::unwritable, path, "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw ImageIoError(Kind::unwritable, path, "write failed");
}

}  // namespace docenh
