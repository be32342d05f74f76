#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <string>

#include "phylokit/error.hpp"
#include "phylokit/fileutil.hpp"
#include "phylokit/image.hpp"

namespace phylokit::imageops {
namespace {

std::string lower_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::vector<std::uint8_t> to_bytes(const GrayImage& img) {
  if (img.empty()) fail(ErrorCode::kDegenerateInput, "cannot encode an empty image");
  std::vector<std::uint8_t> out(img.size());
  auto px = img.pixels();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(std::clamp(std::round(px[i]), 0.0, 255.0));
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  const auto pixels = to_bytes(img);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr))
    fail(ErrorCode::kIo, std::string("png: ") + image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr))
    fail(ErrorCode::kIo, std::string("png: ") + image.message);
  out.resize(size);
  return out;
}

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    fail(ErrorCode::kIo, "not a PNG stream");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    fail(ErrorCode::kIo, std::string("png: ") + image.message);
  // Color inputs are reduced to gray by libpng.
  image.format = PNG_FORMAT_GRAY;
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    png_image_free(&image);
    fail(ErrorCode::kIo, std::string("png: ") + image.message);
  }
  return GrayImage(w, h, std::vector<double>(raw.begin(), raw.end()));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const auto pixels = to_bytes(img);
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    long v = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && v < 1'000'000)
      v = v * 10 + (bytes[pos++] - '0');
    if (pos == start) fail(ErrorCode::kIo, "pgm: malformed header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') fail(ErrorCode::kIo, "not a P5 PGM");
  pos = 2;
  const long w = read_int(), h = read_int(), maxval = read_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    fail(ErrorCode::kIo, "pgm: only 8-bit images are supported");
  ++pos;  // single whitespace before the raster
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() < pos + n) fail(ErrorCode::kIo, "pgm: truncated raster");
  std::vector<double> data(n);
  const double scale = 255.0 / maxval;
  for (std::size_t i = 0; i < n; ++i) data[i] = maxval == 255 ? bytes[pos + i] : bytes[pos + i] * scale;
  return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

GrayImage load_image(const std::string& path) {
  const auto bytes = read_binary_file(path);
  const std::string ext = lower_extension(path);
  if (ext == "pgm") return decode_pgm(bytes);
  if (ext == "png") return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  return decode_png(bytes);
}

void save_image(const GrayImage& img, const std::string& path) {
  const std::string ext = lower_extension(path);
  if (ext == "pgm") {
    write_file_atomic(path, encode_pgm(img));
  } else if (ext == "png") {
    write_file_atomic(path, encode_png(img));
  } else {
    fail(ErrorCode::kInvalidArgument, "unsupported image extension: " + path);
  }
}

}  // namespace phylokit::imageops
