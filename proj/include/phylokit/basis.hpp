#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include "phylokit/image.hpp"

namespace phylokit::basisfit {

enum class Family { kLegendre, kChebyshev, kGabor, kGaussianRbf, kBumpRbf };

inline constexpr std::array<Family, 5> kAllFamilies = {
    Family::kLegendre, Family::kChebyshev, Family::kGabor, Family::kGaussianRbf, Family::kBumpRbf};

std::string_view family_name(Family family);
std::optional<Family> family_from_name(std::string_view name);

// Coefficient count m: 6, 6, 4, 256, 256.
int family_dim(Family family);
bool is_polynomial(Family family);
bool is_rbf(Family family);

// Degree-n Legendre or Chebyshev (first kind) value at x in [-1, 1], by the
// three-term recurrences. Throws kParamDomain for |x| > 1 + 1e-12.
double eval_poly(Family family, int degree, double x);

// Gaussian: exp(-(x - mu)^2). Bump: exp(-1 / (1 - z^2)) with z = x - mu, and 0
// for |z| >= 1.
double rbf_kernel(Family family, double x, double mu);

inline constexpr std::array<double, 4> kGaborWavelengths = {2.0, 3.0, 4.0, 5.0};
inline constexpr std::array<double, 4> kGaborOrientationsDeg = {0.0, 45.0, 90.0, 135.0};

// Complex Gabor kernel, isotropic envelope with sigma = 0.56 * wavelength,
// zero DC, scaled so the envelope sums to one. Row-major, side = 2*radius+1.
struct GaborKernel {
  double wavelength = 0.0;
  double orientation_deg = 0.0;
  int radius = 0;
  std::vector<std::complex<double>> taps;
  int side() const { return 2 * radius + 1; }
};

GaborKernel gabor_kernel(double wavelength, double orientation_deg);
int gabor_max_support();

// Sixteen filter responses of the normalized intensities, combined per
// wavelength as the mean magnitude over the four orientations. Returns four
// response grids in ascending wavelength order.
// Images smaller than the largest kernel throw kDegenerateInput.
std::vector<imageops::GrayImage> gabor_bank(const imageops::GrayImage& img);

// Same, on already-normalized values laid out as width x height.
std::vector<std::vector<double>> gabor_bank(const std::vector<double>& values, int width,
                                            int height);

}  // namespace phylokit::basisfit
