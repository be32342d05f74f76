#include <algorithm>
#include <cmath>
#include <numbers>

#include "phylokit/basis.hpp"
#include "phylokit/error.hpp"

namespace phylokit::basisfit {
namespace {

constexpr double kSigmaPerWavelength = 0.56;

using cplx = std::complex<double>;

struct Separable {
  int radius = 0;
  std::vector<cplx> wx, wy;   // carrier times envelope, per axis
  std::vector<double> ex;     // envelope per axis (same on both)
  cplx dc = 0.0;              // c in  env * (carrier - c)
  double norm = 1.0;          // sum of the 2-D envelope
};

Separable separable_gabor(double wavelength, double orientation_deg) {
  const double sigma = kSigmaPerWavelength * wavelength;
  const double th = orientation_deg * std::numbers::pi / 180.0;
  const double kx = 2.0 * std::numbers::pi * std::cos(th) / wavelength;
  const double ky = 2.0 * std::numbers::pi * std::sin(th) / wavelength;
  Separable s;
  s.radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int side = 2 * s.radius + 1;
  s.wx.resize(side);
  s.wy.resize(side);
  s.ex.resize(side);
  cplx sx = 0.0, sy = 0.0;
  double se = 0.0;
  for (int i = -s.radius; i <= s.radius; ++i) {
    const double e = std::exp(-0.5 * i * i / (sigma * sigma));
    s.ex[i + s.radius] = e;
    s.wx[i + s.radius] = e * std::polar(1.0, kx * i);
    s.wy[i + s.radius] = e * std::polar(1.0, ky * i);
    sx += s.wx[i + s.radius];
    sy += s.wy[i + s.radius];
    se += e;
  }
  s.norm = se * se;
  s.dc = sx * sy / s.norm;
  return s;
}

// Correlation along one axis with replicate border.
template <typename In, typename Tap>
std::vector<cplx> correlate_axis(const std::vector<In>& src, int w, int h,
                                 const std::vector<Tap>& taps, bool horizontal) {
  const int r = static_cast<int>(taps.size() / 2);
  std::vector<cplx> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      cplx acc = 0.0;
      for (int k = -r; k <= r; ++k) {
        const int xx = horizontal ? std::clamp(x + k, 0, w - 1) : x;
        const int yy = horizontal ? y : std::clamp(y + k, 0, h - 1);
        acc += cplx(src[static_cast<std::size_t>(yy) * w + xx]) * cplx(taps[k + r]);
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

}  // namespace

std::string_view family_name(Family family) {
  switch (family) {
    case Family::kLegendre: return "legendre";
    case Family::kChebyshev: return "chebyshev";
    case Family::kGabor: return "gabor";
    case Family::kGaussianRbf: return "gaussian_rbf";
    case Family::kBumpRbf: return "bump_rbf";
  }
  return "unknown";
}

std::optional<Family> family_from_name(std::string_view name) {
  for (Family f : kAllFamilies)
    if (family_name(f) == name) return f;
  return std::nullopt;
}

int family_dim(Family family) {
  switch (family) {
    case Family::kLegendre:
    case Family::kChebyshev: return 6;
    case Family::kGabor: return 4;
    case Family::kGaussianRbf:
    case Family::kBumpRbf: return 256;
  }
  return 0;
}

bool is_polynomial(Family family) {
  return family == Family::kLegendre || family == Family::kChebyshev;
}

bool is_rbf(Family family) { return family == Family::kGaussianRbf || family == Family::kBumpRbf; }

double eval_poly(Family family, int degree, double x) {
  if (!is_polynomial(family)) fail(ErrorCode::kInvalidArgument, "eval_poly needs a polynomial family");
  if (degree < 0) fail(ErrorCode::kParamDomain, "polynomial degree must be non-negative");
  if (!(std::abs(x) <= 1.0 + 1e-12))
    fail(ErrorCode::kParamDomain, "polynomial argument outside [-1, 1]");
  if (degree == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int n = 1; n < degree; ++n) {
    const double next = family == Family::kLegendre
                            ? ((2.0 * n + 1.0) * x * cur - n * prev) / (n + 1.0)
                            : 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double rbf_kernel(Family family, double x, double mu) {
  const double z = x - mu;
  if (family == Family::kGaussianRbf) return std::exp(-z * z);
  if (family == Family::kBumpRbf) return std::abs(z) < 1.0 ? std::exp(-1.0 / (1.0 - z * z)) : 0.0;
  fail(ErrorCode::kInvalidArgument, "rbf_kernel needs an RBF family");
}

GaborKernel gabor_kernel(double wavelength, double orientation_deg) {
  if (!(wavelength >= 2.0)) fail(ErrorCode::kParamDomain, "gabor wavelength must be >= 2");
  const Separable s = separable_gabor(wavelength, orientation_deg);
  GaborKernel k;
  k.wavelength = wavelength;
  k.orientation_deg = orientation_deg;
  k.radius = s.radius;
  const int side = k.side();
  k.taps.resize(static_cast<std::size_t>(side) * side);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      k.taps[static_cast<std::size_t>(y) * side + x] =
          (s.wx[x] * s.wy[y] - s.dc * s.ex[x] * s.ex[y]) / s.norm;
  return k;
}

int gabor_max_support() {
  const double lmax = *std::max_element(kGaborWavelengths.begin(), kGaborWavelengths.end());
  return 2 * static_cast<int>(std::ceil(3.0 * kSigmaPerWavelength * lmax)) + 1;
}

std::vector<std::vector<double>> gabor_bank(const std::vector<double>& values, int width,
                                            int height) {
  if (values.size() != static_cast<std::size_t>(width) * height)
    fail(ErrorCode::kInvalidArgument, "gabor_bank: value count does not match dimensions");
  const int support = gabor_max_support();
  if (width < support || height < support)
    fail(ErrorCode::kDegenerateInput, "image smaller than the " + std::to_string(support) + "x" +
                                          std::to_string(support) + " gabor support");
  std::vector<std::vector<double>> out;
  for (double wl : kGaborWavelengths) {
    std::vector<double> combined(values.size(), 0.0);
    for (double deg : kGaborOrientationsDeg) {
      const Separable s = separable_gabor(wl, deg);
      const auto carrier = correlate_axis(correlate_axis(values, width, height, s.wx, true), width,
                                          height, s.wy, false);
      const auto env = correlate_axis(correlate_axis(values, width, height, s.ex, true), width,
                                      height, s.ex, false);
      for (std::size_t p = 0; p < values.size(); ++p)
        combined[p] += std::abs((carrier[p] - s.dc * env[p]) / s.norm) / kGaborOrientationsDeg.size();
    }
    out.push_back(std::move(combined));
  }
  return out;
}

std::vector<imageops::GrayImage> gabor_bank(const imageops::GrayImage& img) {
  if (img.empty()) fail(ErrorCode::kDegenerateInput, "empty image");
  const auto responses = gabor_bank(imageops::normalize_unit(img), img.width(), img.height());
  std::vector<imageops::GrayImage> out;
  for (const auto& r : responses) out.emplace_back(img.width(), img.height(), r);
  return out;
}

}  // namespace phylokit::basisfit
