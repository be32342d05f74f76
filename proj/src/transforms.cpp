#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "phylokit/error.hpp"
#include "phylokit/transforms.hpp"

namespace phylokit::imageops {
namespace {

constexpr std::array<std::pair<TransformKind, std::string_view>, 8> kKindNames = {{
    {TransformKind::kBrightness, "brightness"},
    {TransformKind::kMedian, "median"},
    {TransformKind::kGaussianSmooth, "gaussian_smooth"},
    {TransformKind::kGamma, "gamma"},
    {TransformKind::kResample, "resample"},
    {TransformKind::kRotate, "rotate"},
    {TransformKind::kTranslate, "translate"},
    {TransformKind::kScale, "scale"},
}};

constexpr std::array<TransformKind, 4> kPhotometricKinds = {
    TransformKind::kBrightness, TransformKind::kMedian, TransformKind::kGaussianSmooth,
    TransformKind::kGamma};
constexpr std::array<TransformKind, 4> kGeometricKinds = {
    TransformKind::kResample, TransformKind::kRotate, TransformKind::kTranslate,
    TransformKind::kScale};

void check_range(const TransformSpec& spec, const char* name, double lo, double hi) {
  const double v = spec.param(name);
  if (!std::isfinite(v) || v < lo || v > hi)
    fail(ErrorCode::kParamDomain, std::string(kind_name(spec.kind)) + " parameter " + name +
                                      " = " + std::to_string(v) + " outside [" +
                                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

void check_integer(const TransformSpec& spec, const char* name) {
  const double v = spec.param(name);
  if (v != std::floor(v))
    fail(ErrorCode::kParamDomain,
         std::string(kind_name(spec.kind)) + " parameter " + name + " must be an integer");
}

void require_pixels(const GrayImage& img) {
  if (img.empty()) fail(ErrorCode::kDegenerateInput, "empty image");
}

std::vector<double> gaussian_taps(double stddev) {
  const int radius = static_cast<int>(std::ceil(3.0 * stddev));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-0.5 * i * i / (stddev * stddev));
    sum += taps[i + radius];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

GrayImage rotate(const GrayImage& img, double degrees) {
  const double th = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(th), s = std::sin(th);
  const double cx = (img.width() - 1) / 2.0, cy = (img.height() - 1) / 2.0;
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      // Inverse map: output pixel looks up the source rotated by -theta.
      const double dx = x - cx, dy = y - cy;
      out.at(x, y) = bilinear_sample(img, cx + c * dx + s * dy, cy - s * dx + c * dy);
    }
  }
  return out;
}

GrayImage zoom(const GrayImage& img, double factor) {
  const double cx = (img.width() - 1) / 2.0, cy = (img.height() - 1) / 2.0;
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      out.at(x, y) = bilinear_sample(img, cx + (x - cx) / factor, cy + (y - cy) / factor);
  return out;
}

GrayImage translate(const GrayImage& img, int dx, int dy) {
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(x, y) = img.clamped(x - dx, y - dy);
  return out;
}

}  // namespace

std::string_view kind_name(TransformKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<TransformKind> kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  return std::nullopt;
}

bool is_photometric(TransformKind kind) {
  return std::find(kPhotometricKinds.begin(), kPhotometricKinds.end(), kind) !=
         kPhotometricKinds.end();
}

std::string_view class_name(TransformClass cls) {
  switch (cls) {
    case TransformClass::kPhotometric: return "photometric";
    case TransformClass::kGeometric: return "geometric";
    case TransformClass::kMixed: return "mixed";
  }
  return "unknown";
}

std::optional<TransformClass> class_from_name(std::string_view name) {
  if (name == "photometric") return TransformClass::kPhotometric;
  if (name == "geometric") return TransformClass::kGeometric;
  if (name == "mixed") return TransformClass::kMixed;
  return std::nullopt;
}

double TransformSpec::param(const std::string& name) const {
  const auto it = params.find(name);
  if (it == params.end())
    fail(ErrorCode::kParamDomain,
         std::string(kind_name(kind)) + " transform is missing parameter " + name);
  return it->second;
}

void validate(const TransformSpec& spec) {
  using R = Ranges;
  switch (spec.kind) {
    case TransformKind::kBrightness:
      check_range(spec, "a", R::kBrightnessA[0], R::kBrightnessA[1]);
      check_range(spec, "b", R::kBrightnessB[0], R::kBrightnessB[1]);
      break;
    case TransformKind::kMedian:
      for (const char* p : {"m", "n"}) {
        check_range(spec, p, R::kMedianWindow[0], R::kMedianWindow[1]);
        check_integer(spec, p);
      }
      break;
    case TransformKind::kGaussianSmooth:
      check_range(spec, "stddev", R::kGaussianStddev[0], R::kGaussianStddev[1]);
      break;
    case TransformKind::kGamma:
      check_range(spec, "gamma", R::kGamma[0], R::kGamma[1]);
      break;
    case TransformKind::kResample:
      check_range(spec, "factor", R::kResampleFactor[0], R::kResampleFactor[1]);
      break;
    case TransformKind::kRotate:
      check_range(spec, "degrees", R::kRotationDegrees[0], R::kRotationDegrees[1]);
      break;
    case TransformKind::kTranslate:
      for (const char* p : {"dx", "dy"}) {
        check_range(spec, p, -R::kTranslationMax, R::kTranslationMax);
        check_integer(spec, p);
      }
      break;
    case TransformKind::kScale:
      check_range(spec, "factor", R::kScaleFactor[0], R::kScaleFactor[1]);
      break;
  }
}

GrayImage gaussian_blur(const GrayImage& img, double stddev) {
  require_pixels(img);
  if (!(stddev > 0.0)) fail(ErrorCode::kParamDomain, "gaussian stddev must be positive");
  const auto taps = gaussian_taps(stddev);
  const int r = static_cast<int>(taps.size() / 2);
  GrayImage tmp(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += taps[k + r] * img.clamped(x + k, y);
      tmp.at(x, y) = acc;
    }
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += taps[k + r] * tmp.clamped(x, y + k);
      out.at(x, y) = acc;
    }
  return out;
}

GrayImage median_filter(const GrayImage& img, int rows, int cols) {
  require_pixels(img);
  if (rows < 1 || cols < 1) fail(ErrorCode::kParamDomain, "median window must be positive");
  const int y0 = -(rows - 1) / 2, y1 = rows / 2;
  const int x0 = -(cols - 1) / 2, x1 = cols / 2;
  std::vector<double> window(static_cast<std::size_t>(rows) * cols);
  const std::size_t n = window.size();
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      std::size_t i = 0;
      for (int dy = y0; dy <= y1; ++dy)
        for (int dx = x0; dx <= x1; ++dx) window[i++] = img.clamped(x + dx, y + dy);
      auto mid = window.begin() + n / 2;
      std::nth_element(window.begin(), mid, window.end());
      double v = *mid;
      if (n % 2 == 0) v = 0.5 * (v + *std::max_element(window.begin(), mid));
      out.at(x, y) = v;
    }
  }
  return out;
}

double bilinear_sample(const GrayImage& img, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
  const int ix = static_cast<int>(std::floor(x)), iy = static_cast<int>(std::floor(y));
  const int jx = std::min(ix + 1, img.width() - 1), jy = std::min(iy + 1, img.height() - 1);
  const double fx = x - ix, fy = y - iy;
  const double top = img.at(ix, iy) * (1.0 - fx) + img.at(jx, iy) * fx;
  const double bot = img.at(ix, jy) * (1.0 - fx) + img.at(jx, jy) * fx;
  return top * (1.0 - fy) + bot * fy;
}

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
  require_pixels(img);
  if (width <= 0 || height <= 0) fail(ErrorCode::kParamDomain, "resize target must be non-empty");
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out.at(x, y) = bilinear_sample(img, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
  return out;
}

GrayImage apply_photometric(const GrayImage& img, const TransformSpec& spec) {
  if (!is_photometric(spec.kind))
    fail(ErrorCode::kInvalidArgument, std::string(kind_name(spec.kind)) + " is not photometric");
  require_pixels(img);
  validate(spec);
  GrayImage out = img;
  switch (spec.kind) {
    case TransformKind::kBrightness: {
      const double a = spec.param("a"), b = spec.param("b");
      for (double& p : out.pixels()) p = a * p + b;
      break;
    }
    case TransformKind::kGamma: {
      const double g = spec.param("gamma");
      if (g == 1.0) break;
      for (double& p : out.pixels()) p = 255.0 * std::pow(std::max(p, 0.0) / 255.0, g);
      break;
    }
    case TransformKind::kGaussianSmooth:
      out = gaussian_blur(img, spec.param("stddev"));
      break;
    case TransformKind::kMedian:
      out = median_filter(img, static_cast<int>(spec.param("m")),
                          static_cast<int>(spec.param("n")));
      break;
    default:
      break;
  }
  clip_to_range(out);
  return out;
}

GrayImage apply_geometric(const GrayImage& img, const TransformSpec& spec) {
  if (is_photometric(spec.kind))
    fail(ErrorCode::kInvalidArgument, std::string(kind_name(spec.kind)) + " is not geometric");
  require_pixels(img);
  validate(spec);
  GrayImage out;
  switch (spec.kind) {
    case TransformKind::kResample: {
      const double f = spec.param("factor");
      if (f == 1.0) return img;
      const int w = std::max(1, static_cast<int>(std::lround(img.width() * f)));
      const int h = std::max(1, static_cast<int>(std::lround(img.height() * f)));
      out = resize_bilinear(resize_bilinear(img, w, h), img.width(), img.height());
      break;
    }
    case TransformKind::kRotate: {
      const double d = spec.param("degrees");
      if (d == 0.0) return img;
      out = rotate(img, d);
      break;
    }
    case TransformKind::kTranslate:
      out = translate(img, static_cast<int>(spec.param("dx")), static_cast<int>(spec.param("dy")));
      break;
    case TransformKind::kScale: {
      const double f = spec.param("factor");
      if (f == 1.0) return img;
      out = zoom(img, f);
      break;
    }
    default:
      return img;
  }
  clip_to_range(out);
  return out;
}

GrayImage apply_transform(const GrayImage& img, const TransformSpec& spec) {
  return is_photometric(spec.kind) ? apply_photometric(img, spec) : apply_geometric(img, spec);
}

TransformSpec sample_transform(TransformKind kind, Rng& rng) {
  using R = Ranges;
  TransformSpec spec;
  spec.kind = kind;
  auto& p = spec.params;
  switch (kind) {
    case TransformKind::kBrightness:
      p["a"] = rng.uniform(R::kBrightnessA[0], R::kBrightnessA[1]);
      p["b"] = rng.uniform(R::kBrightnessB[0], R::kBrightnessB[1]);
      break;
    case TransformKind::kMedian:
      p["m"] = static_cast<double>(rng.uniform_int(R::kMedianWindow[0], R::kMedianWindow[1]));
      p["n"] = static_cast<double>(rng.uniform_int(R::kMedianWindow[0], R::kMedianWindow[1]));
      break;
    case TransformKind::kGaussianSmooth:
      p["stddev"] = rng.uniform(R::kGaussianStddev[0], R::kGaussianStddev[1]);
      break;
    case TransformKind::kGamma:
      p["gamma"] = rng.uniform(R::kGamma[0], R::kGamma[1]);
      break;
    case TransformKind::kResample:
      p["factor"] = rng.uniform(R::kResampleFactor[0], R::kResampleFactor[1]);
      break;
    case TransformKind::kRotate:
      p["degrees"] = rng.uniform(R::kRotationDegrees[0], R::kRotationDegrees[1]);
      break;
    case TransformKind::kTranslate:
      for (const char* axis : {"dx", "dy"}) {
        const auto mag = rng.uniform_int(R::kTranslationSampled[0], R::kTranslationSampled[1]);
        p[axis] = static_cast<double>(rng.coin() ? mag : -mag);
      }
      break;
    case TransformKind::kScale:
      p["factor"] = rng.uniform(R::kScaleFactor[0], R::kScaleFactor[1]);
      break;
  }
  return spec;
}

TransformSpec sample_transform(TransformClass cls, Rng& rng) {
  if (cls == TransformClass::kMixed)
    cls = rng.coin() ? TransformClass::kGeometric : TransformClass::kPhotometric;
  const auto& kinds = cls == TransformClass::kPhotometric ? kPhotometricKinds : kGeometricKinds;
  return sample_transform(kinds[rng.uniform_int(0, 3)], rng);
}

}  // namespace phylokit::imageops
