#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace phylokit::imageops {

// Row-major grid of real-valued intensities. Values are nominally in [0, 255];
// quantization to 8 bits only happens when an image is written to disk.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  // Replicate-border access: coordinates are clamped into the image.
  double clamped(int x, int y) const;

  std::span<double> pixels() noexcept { return data_; }
  std::span<const double> pixels() const noexcept { return data_; }

  bool operator==(const GrayImage& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Clamps every intensity into [0, 255].
void clip_to_range(GrayImage& img);

// Rounds to the nearest integer and clips, as done on file write.
GrayImage quantize8(const GrayImage& img);

// p -> p / 127.5 - 1, mapping [0, 255] onto [-1, 1].
inline double normalize_unit(double p) { return p / 127.5 - 1.0; }
inline double denormalize_unit(double x) { return (x + 1.0) * 127.5; }
std::vector<double> normalize_unit(const GrayImage& img);
GrayImage denormalize_unit(std::span<const double> values, int width, int height);

// A square block cut from an image. Pixels beyond the right/bottom edge are
// filled by replicating the last column/row; valid_width/valid_height give
// the unpadded extent.
struct Block {
  int origin_x = 0;
  int origin_y = 0;
  int size = 0;
  int valid_width = 0;
  int valid_height = 0;
  std::vector<double> values;  // size * size, row-major

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * size + x]; }
  bool is_valid(int x, int y) const { return x < valid_width && y < valid_height; }
};

// Non-overlapping block tiling in row-major block order.
// Yields ceil(width/block) * ceil(height/block) blocks.
std::vector<Block> tessellate(const GrayImage& img, int block);

// Inverse of tessellate for the unpadded region.
GrayImage reassemble(const std::vector<Block>& blocks, int width, int height);

// Deterministic synthetic grayscale "photograph": smooth blobs, gradients and
// fine texture, rescaled into [lo, hi]. Stands in for a real image corpus.
GrayImage procedural_image(std::uint64_t seed, int width, int height, double lo = 15.0,
                           double hi = 240.0);

// PNG and binary PGM (P5), 8-bit grayscale. Format is chosen by extension.
GrayImage load_image(const std::string& path);
void save_image(const GrayImage& img, const std::string& path);
std::vector<std::uint8_t> encode_png(const GrayImage& img);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
GrayImage decode_png(std::span<const std::uint8_t> bytes);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);

}  // namespace phylokit::imageops
