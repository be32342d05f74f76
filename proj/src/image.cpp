#include <algorithm>
#include <cmath>
#include <string>

#include "phylokit/error.hpp"
#include "phylokit/image.hpp"
#include "phylokit/rng.hpp"
#include "phylokit/transforms.hpp"

namespace phylokit::imageops {

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) fail(ErrorCode::kInvalidArgument, "negative image dimensions");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) fail(ErrorCode::kInvalidArgument, "negative image dimensions");
  if (data_.size() != static_cast<std::size_t>(width) * height)
    fail(ErrorCode::kInvalidArgument, "pixel count does not match width x height");
}

double GrayImage::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y);
}

void clip_to_range(GrayImage& img) {
  for (double& p : img.pixels()) p = std::clamp(p, 0.0, 255.0);
}

GrayImage quantize8(const GrayImage& img) {
  GrayImage out = img;
  for (double& p : out.pixels()) p = std::clamp(std::round(p), 0.0, 255.0);
  return out;
}

std::vector<double> normalize_unit(const GrayImage& img) {
  std::vector<double> out(img.size());
  auto px = img.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = normalize_unit(px[i]);
  return out;
}

GrayImage denormalize_unit(std::span<const double> values, int width, int height) {
  std::vector<double> data(values.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = denormalize_unit(values[i]);
  return GrayImage(width, height, std::move(data));
}

std::vector<Block> tessellate(const GrayImage& img, int block) {
  if (block <= 0) fail(ErrorCode::kParamDomain, "block size must be positive");
  if (img.empty()) fail(ErrorCode::kDegenerateInput, "cannot tessellate an empty image");
  const int bx = (img.width() + block - 1) / block;
  const int by = (img.height() + block - 1) / block;
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(bx) * by);
  for (int j = 0; j < by; ++j) {
    for (int i = 0; i < bx; ++i) {
      Block b;
      b.origin_x = i * block;
      b.origin_y = j * block;
      b.size = block;
      b.valid_width = std::min(block, img.width() - b.origin_x);
      b.valid_height = std::min(block, img.height() - b.origin_y);
      b.values.resize(static_cast<std::size_t>(block) * block);
      for (int y = 0; y < block; ++y)
        for (int x = 0; x < block; ++x)
          b.values[static_cast<std::size_t>(y) * block + x] =
              img.clamped(b.origin_x + x, b.origin_y + y);
      blocks.push_back(std::move(b));
    }
  }
  return blocks;
}

GrayImage reassemble(const std::vector<Block>& blocks, int width, int height) {
  GrayImage out(width, height);
  for (const Block& b : blocks) {
    for (int y = 0; y < b.valid_height; ++y) {
      for (int x = 0; x < b.valid_width; ++x) {
        const int gx = b.origin_x + x, gy = b.origin_y + y;
        if (gx < width && gy < height) out.at(gx, gy) = b.at(x, y);
      }
    }
  }
  return out;
}

GrayImage procedural_image(std::uint64_t seed, int width, int height, double lo, double hi) {
  if (width <= 0 || height <= 0) fail(ErrorCode::kDegenerateInput, "empty procedural image");
  if (!(lo < hi) || lo < 0.0 || hi > 255.0)
    fail(ErrorCode::kParamDomain, "procedural range must satisfy 0 <= lo < hi <= 255");
  Rng rng(seed);
  GrayImage img(width, height);
  const double scale = std::max(width, height) / 64.0;
  for (int k = 0; k < 12; ++k) {
    const double cx = rng.uniform(0.0, width);
    const double cy = rng.uniform(0.0, height);
    const double s = rng.uniform(3.0, 14.0) * scale;
    const double a = rng.uniform(-1.0, 1.0);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        img.at(x, y) += a * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * s * s));
  }
  const double gx = rng.uniform(-0.02, 0.02) / scale;
  const double gy = rng.uniform(-0.02, 0.02) / scale;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) img.at(x, y) += gx * x + gy * y + 0.15 * rng.normal();
  img = gaussian_blur(img, 0.7);
  auto px = img.pixels();
  const auto [mn, mx] = std::minmax_element(px.begin(), px.end());
  const double vmin = *mn, span = *mx - *mn;
  for (double& p : px) p = span > 0 ? lo + (p - vmin) / span * (hi - lo) : (lo + hi) / 2;
  return img;
}

}  // namespace phylokit::imageops
