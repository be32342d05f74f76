#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "phylokit/image.hpp"
#include "phylokit/rng.hpp"

namespace phylokit::imageops {

enum class TransformKind {
  kBrightness,
  kMedian,
  kGaussianSmooth,
  kGamma,
  kResample,
  kRotate,
  kTranslate,
  kScale,
};

enum class TransformClass { kPhotometric, kGeometric, kMixed };

std::string_view kind_name(TransformKind kind);
std::optional<TransformKind> kind_from_name(std::string_view name);
bool is_photometric(TransformKind kind);

std::string_view class_name(TransformClass cls);
std::optional<TransformClass> class_from_name(std::string_view name);

// Named parameters per kind:
//   brightness      a, b           p -> a*p + b
//   median          m, n           m x n window (rows x cols), integers
//   gaussian_smooth stddev
//   gamma           gamma          p -> 255 * (p/255)^gamma
//   resample        factor         down/up-sample round trip
//   rotate          degrees        about the image center
//   translate       dx, dy         integer pixel shift
//   scale           factor         zoom about the image center
struct TransformSpec {
  TransformKind kind = TransformKind::kBrightness;
  std::map<std::string, double> params;

  double param(const std::string& name) const;
  bool operator==(const TransformSpec&) const = default;
};

// Admissible parameter ranges. The generator samples inside these; the apply
// functions reject anything outside them with ErrorCode::kParamDomain.
struct Ranges {
  static constexpr double kBrightnessA[2] = {0.9, 1.5};
  static constexpr double kBrightnessB[2] = {-30.0, 30.0};
  static constexpr int kMedianWindow[2] = {2, 6};
  static constexpr double kGaussianStddev[2] = {1.0, 3.0};
  static constexpr double kGamma[2] = {0.5, 1.5};
  static constexpr double kResampleFactor[2] = {0.90, 1.10};
  static constexpr double kRotationDegrees[2] = {-5.0, 5.0};
  static constexpr int kTranslationSampled[2] = {5, 20};  // magnitude per axis when sampled
  static constexpr int kTranslationMax = 20;              // accepted |dx|, |dy|
  static constexpr double kScaleFactor[2] = {0.90, 1.10};
};

// Throws kParamDomain when params are missing or out of range.
void validate(const TransformSpec& spec);

GrayImage apply_photometric(const GrayImage& img, const TransformSpec& spec);
GrayImage apply_geometric(const GrayImage& img, const TransformSpec& spec);
GrayImage apply_transform(const GrayImage& img, const TransformSpec& spec);

// Draws one transform of the requested class; kind and parameters are uniform
// over the admissible ranges. Mixed picks photometric or geometric with equal
// probability first.
TransformSpec sample_transform(TransformClass cls, Rng& rng);
TransformSpec sample_transform(TransformKind kind, Rng& rng);

// Building blocks shared with the Gabor bank and the tests.
GrayImage gaussian_blur(const GrayImage& img, double stddev);
GrayImage median_filter(const GrayImage& img, int rows, int cols);
double bilinear_sample(const GrayImage& img, double x, double y);
GrayImage resize_bilinear(const GrayImage& img, int width, int height);

}  // namespace phylokit::imageops
