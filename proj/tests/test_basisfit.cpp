#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

#include "phylokit/basis.hpp"
#include "phylokit/error.hpp"
#include "phylokit/fit.hpp"
#include "phylokit/rng.hpp"
#include "phylokit/transforms.hpp"

using namespace phylokit;
using namespace phylokit::basisfit;
using imageops::GrayImage;
using imageops::TransformKind;

namespace {

double binom(double a, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= (a - i) / (i + 1);
  return out;
}

// Explicit-sum forms of the two polynomial families.
double legendre_sum(int n, double x) {
  double s = 0.0;
  for (int k = 0; k <= n; ++k) s += std::pow(x, k) * binom(n, k) * binom((n + k - 1) / 2.0, n);
  return std::pow(2.0, n) * s;
}

double chebyshev_sum(int n, double x) {
  // x^n (1 - x^-2)^k rewritten as x^(n-2k) (x^2 - 1)^k, same value without the pole at 0.
  double s = 0.0;
  for (int k = 0; k <= n / 2; ++k) s += binom(n, 2 * k) * std::pow(x, n - 2 * k) * std::pow(x * x - 1.0, k);
  return s;
}

GrayImage textured(std::uint64_t seed, int w = 64, int h = 64, double lo = 40, double hi = 150) {
  return imageops::procedural_image(seed, w, h, lo, hi);
}

GrayImage brighten(const GrayImage& img, double a, double b) {
  return imageops::apply_photometric(img, {TransformKind::kBrightness, {{"a", a}, {"b", b}}});
}

GrayImage gamma(const GrayImage& img, double g) {
  return imageops::apply_photometric(img, {TransformKind::kGamma, {{"gamma", g}}});
}

// Unconstrained batch least squares of src on the first `degree + 1` basis rows of tgt.
std::pair<Eigen::VectorXd, double> batch_lsq(const GrayImage& src, const GrayImage& tgt, Family f,
                                             int degree) {
  const auto s = imageops::normalize_unit(src);
  const auto t = imageops::normalize_unit(tgt);
  const int n = static_cast<int>(s.size());
  Eigen::MatrixXd a(n, degree + 1);
  Eigen::VectorXd b(n);
  for (int p = 0; p < n; ++p) {
    b[p] = s[p];
    for (int h = 0; h <= degree; ++h)
      a(p, h) = f == Family::kLegendre ? legendre_sum(h, t[p]) : chebyshev_sum(h, t[p]);
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  return {x, (a * x - b).squaredNorm() / n};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace

TEST_CASE("eval_poly agrees with the explicit sums") {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    for (int n = 0; n <= 5; ++n) {
      REQUIRE(std::abs(eval_poly(Family::kLegendre, n, x) - legendre_sum(n, x)) < 1e-9);
      REQUIRE(std::abs(eval_poly(Family::kChebyshev, n, x) - chebyshev_sum(n, x)) < 1e-9);
    }
  }
  for (int n = 0; n <= 5; ++n) {
    CHECK(eval_poly(Family::kLegendre, n, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval_poly(Family::kChebyshev, n, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(eval_poly(Family::kLegendre, 1, 0.3) == 0.3);
  CHECK(std::abs(eval_poly(Family::kChebyshev, 3, std::cos(0.7)) - std::cos(2.1)) < 1e-12);
  CHECK(code_of([] { eval_poly(Family::kLegendre, 2, 1.01); }) == ErrorCode::kParamDomain);
  CHECK_NOTHROW(eval_poly(Family::kLegendre, 2, 1.0 + 1e-13));
}

TEST_CASE("rbf kernels") {
  CHECK(rbf_kernel(Family::kGaussianRbf, 0.4, 0.4) == 1.0);
  CHECK(rbf_kernel(Family::kGaussianRbf, 1.4, 0.4) == doctest::Approx(std::exp(-1.0)));
  CHECK(rbf_kernel(Family::kBumpRbf, 0.2, 0.2) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(rbf_kernel(Family::kBumpRbf, 1.0, 0.0) == 0.0);
  CHECK(rbf_kernel(Family::kBumpRbf, -1.0, 0.0) == 0.0);
  CHECK(rbf_kernel(Family::kBumpRbf, 3.0, 0.0) == 0.0);
  CHECK(rbf_kernel(Family::kBumpRbf, 0.999, 0.0) < 1e-200);
}

TEST_CASE("family metadata") {
  CHECK(family_dim(Family::kLegendre) == 6);
  CHECK(family_dim(Family::kChebyshev) == 6);
  CHECK(family_dim(Family::kGabor) == 4);
  CHECK(family_dim(Family::kGaussianRbf) == 256);
  CHECK(family_dim(Family::kBumpRbf) == 256);
  for (Family f : kAllFamilies) CHECK(family_from_name(family_name(f)) == f);
  CHECK_FALSE(family_from_name("fourier").has_value());
}

TEST_CASE("gabor kernels") {
  const auto k = gabor_kernel(5.0, 45.0);
  CHECK(k.side() == 19);
  CHECK(gabor_max_support() == 19);
  std::complex<double> dc = 0.0;
  for (const auto& t : k.taps) dc += t;
  CHECK(std::abs(dc) < 1e-12);
}

TEST_CASE("gabor bank on constants and size limits") {
  const auto out = gabor_bank(GrayImage(32, 32, 90.0));
  REQUIRE(out.size() == 4);
  for (const auto& r : out) {
    const auto [mn, mx] = std::minmax_element(r.pixels().begin(), r.pixels().end());
    CHECK(*mx - *mn < 1e-12);
  }
  CHECK(gabor_bank(textured(3, 40, 30)).size() == 4);
  CHECK(code_of([] { gabor_bank(GrayImage(18, 40, 1.0)); }) == ErrorCode::kDegenerateInput);
}

TEST_CASE("gabor bank matches its frequency response on a grating") {
  const int w = 96, h = 96;
  const double amp = 100.0 / 127.5;
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = 127.5 + 100.0 * std::cos(2.0 * std::numbers::pi * y / 4.0);
  const auto out = gabor_bank(img);
  REQUIRE(out.size() == 4);

  const double omega = 2.0 * std::numbers::pi / 4.0;  // along y
  std::vector<double> predicted, measured;
  for (std::size_t wi = 0; wi < kGaborWavelengths.size(); ++wi) {
    double pred = 0.0, meas = 0.0;
    int count = 0;
    for (int y = 20; y < h - 20; ++y) {
      for (int x = 20; x < w - 20; ++x) {
        double mag = 0.0;
        for (double deg : kGaborOrientationsDeg) {
          const auto k = gabor_kernel(kGaborWavelengths[wi], deg);
          // Transfer function of the correlation at +omega and -omega.
          std::complex<double> gp = 0.0, gm = 0.0;
          for (int qy = -k.radius; qy <= k.radius; ++qy)
            for (int qx = -k.radius; qx <= k.radius; ++qx) {
              const auto t = k.taps[(qy + k.radius) * k.side() + qx + k.radius];
              gp += t * std::polar(1.0, omega * qy);
              gm += t * std::polar(1.0, -omega * qy);
            }
          const auto phase = std::polar(1.0, omega * y);
          mag += std::abs(0.5 * amp * (gp * phase + gm * std::conj(phase))) / 4.0;
        }
        pred += mag;
        meas += out[wi].at(x, y);
        ++count;
      }
    }
    predicted.push_back(pred / count);
    measured.push_back(meas / count);
    CHECK(measured.back() == doctest::Approx(predicted.back()).epsilon(1e-9));
  }
  const auto argmax = std::max_element(measured.begin(), measured.end()) - measured.begin();
  CHECK(kGaborWavelengths[argmax] == 4.0);
}

TEST_CASE("ICE: identity pair") {
  const GrayImage src = textured(11, 64, 64, 15, 240);
  const auto p = fit_ice(src, src, Family::kLegendre, {});
  CHECK(p.residual_pe < 1e-6);
  const std::vector<double> id = {0, 1, 0, 0, 0, 0};
  for (int h = 0; h < 6; ++h) CHECK(std::abs(p.alpha[h] - id[h]) < 1e-9);
  CHECK(p.converged);
}

TEST_CASE("ICE: brightness pair recovers the affine map") {
  const GrayImage src = textured(12);
  const GrayImage tgt = brighten(src, 1.2, 10.0);
  const auto p = fit_ice(src, tgt, Family::kLegendre, {});
  CHECK(p.residual_pe < 1e-4);
  // src = (tgt - b) / a in normalized units: x_s = x_t / a + ((127.5 - b) / a - 127.5) / 127.5.
  const double a1 = 1.0 / 1.2, a0 = ((127.5 - 10.0) / 1.2 - 127.5) / 127.5;
  const auto [lsq, lsq_pe] = batch_lsq(src, tgt, Family::kLegendre, 5);
  CHECK(std::abs(lsq[0] - a0) < 1e-9);
  CHECK(std::abs(lsq[1] - a1) < 1e-9);
  CHECK(std::abs(p.alpha[0] - a0) < 1e-4);
  CHECK(std::abs(p.alpha[1] - a1) < 1e-4);
  for (int h = 2; h < 6; ++h) CHECK(std::abs(p.alpha[h]) < 1e-4);
}

TEST_CASE("ICE: gamma pair beats a degree-1 fit") {
  const GrayImage src = textured(13, 64, 64, 15, 240);
  const GrayImage tgt = gamma(src, 0.8);
  const auto p = fit_ice(src, tgt, Family::kChebyshev, {});
  const auto [lin, lin_pe] = batch_lsq(src, tgt, Family::kChebyshev, 1);
  const auto [full, full_pe] = batch_lsq(src, tgt, Family::kChebyshev, 5);
  CHECK(p.residual_pe < lin_pe);
  CHECK(p.residual_pe == doctest::Approx(full_pe).epsilon(1e-3));
}

TEST_CASE("ICE: residual never increases") {
  Rng rng(5);
  const std::array kinds = {TransformKind::kBrightness, TransformKind::kMedian,
                            TransformKind::kGaussianSmooth, TransformKind::kGamma};
  for (int i = 0; i < 100; ++i) {
    const GrayImage src = textured(100 + i, 48, 48, 15, 240);
    const auto spec = imageops::sample_transform(kinds[i % 4], rng);
    const GrayImage tgt = imageops::apply_transform(src, spec);
    for (Family f : {Family::kLegendre, Family::kChebyshev}) {
      std::vector<double> trace;
      const auto p = fit_ice_traced(make_basis_stack(src, f), make_basis_stack(tgt, f), {}, trace);
      REQUIRE(trace.size() >= 1);
      for (std::size_t k = 1; k < trace.size(); ++k) REQUIRE(trace[k] <= trace[k - 1]);
      CHECK(p.residual_pe <= trace.front());
      CHECK(p.residual_pe == trace.back());
    }
  }
}

TEST_CASE("ICE: exactly affine pairs fit both polynomial families") {
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    const GrayImage src = textured(300 + i);
    const GrayImage tgt = brighten(src, rng.uniform(0.9, 1.5), rng.uniform(-30, 30));
    for (Family f : {Family::kLegendre, Family::kChebyshev}) {
      const auto p = fit_ice(src, tgt, f, {});
      CHECK(p.residual_pe < 1e-4);
      CHECK(p.iterations <= 30);
    }
  }
}

TEST_CASE("ICE: gabor fits are finite and sized") {
  const GrayImage src = textured(14, 48, 48, 15, 240);
  const auto p = fit_ice(src, gamma(src, 0.7), Family::kGabor, {});
  CHECK(p.alpha.size() == 4);
  for (double a : p.alpha) CHECK(std::isfinite(a));
}

TEST_CASE("ICE: errors") {
  const GrayImage a = textured(1, 32, 32), b = textured(2, 32, 33);
  CHECK(code_of([&] { fit_ice(a, b, Family::kLegendre, {}); }) == ErrorCode::kInvalidArgument);
  IceSettings none;
  none.lambda = 0.0;
  const GrayImage flat(32, 32, 100.0);
  CHECK(code_of([&] { fit_ice(flat, flat, Family::kLegendre, none); }) == ErrorCode::kNumerical);
  IceSettings bad;
  bad.tol = 0.0;
  CHECK(code_of([&] { fit_ice(a, a, Family::kLegendre, bad); }) == ErrorCode::kParamDomain);
  bad = {};
  bad.max_iters = 0;
  CHECK(code_of([&] { fit_ice(a, a, Family::kLegendre, bad); }) == ErrorCode::kParamDomain);
  CHECK(code_of([&] { fit_ice(a, a, Family::kGaussianRbf, {}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("blockwise: matches a pseudo-inverse oracle on toy blocks") {
  const GrayImage src = textured(21, 16, 16, 15, 240);
  const GrayImage tgt = gamma(src, 0.6);
  for (Family f : {Family::kGaussianRbf, Family::kBumpRbf}) {
    const auto fit = fit_blockwise(src, tgt, f, 8);
    REQUIRE(fit.alpha.size() == 64);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(64);
    double sse = 0.0;
    for (int by = 0; by < 2; ++by) {
      for (int bx = 0; bx < 2; ++bx) {
        Eigen::VectorXd x(64), t(64);
        for (int y = 0; y < 8; ++y)
          for (int xx = 0; xx < 8; ++xx) {
            x[y * 8 + xx] = src.at(bx * 8 + xx, by * 8 + y) / 127.5 - 1.0;
            t[y * 8 + xx] = tgt.at(bx * 8 + xx, by * 8 + y) / 127.5 - 1.0;
          }
        const double mu = x.mean();
        Eigen::MatrixXd phi(64, 64);
        for (int p = 0; p < 64; ++p)
          for (int k = 0; k < 64; ++k) {
            const double z = (x[p] - mu) - (x[k] - mu);
            phi(p, k) = f == Family::kGaussianRbf ? std::exp(-z * z)
                                                  : (std::abs(z) < 1 ? std::exp(-1.0 / (1.0 - z * z)) : 0.0);
          }
        Eigen::MatrixXd aug(128, 64);
        aug << phi, std::sqrt(kBlockRidge) * Eigen::MatrixXd::Identity(64, 64);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(128);
        rhs.head(64) = t;
        const Eigen::VectorXd a =
            aug.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
        mean += a / 4.0;
        sse += (phi * a - t).squaredNorm();
      }
    }
    for (int k = 0; k < 64; ++k) REQUIRE(std::abs(fit.alpha[k] - mean[k]) < 1e-6);
    CHECK(fit.residual_pe == doctest::Approx(sse / 256.0).epsilon(1e-6));
  }
}

TEST_CASE("blockwise: zero target gives zero coefficients") {
  const GrayImage src = textured(22);
  const GrayImage zero(64, 64, 127.5);  // normalized value 0
  for (Family f : {Family::kGaussianRbf, Family::kBumpRbf}) {
    const auto p = fit_blockwise(src, zero, f);
    CHECK(p.alpha.size() == 256);
    for (double a : p.alpha) CHECK(a == 0.0);
    CHECK(p.residual_pe == 0.0);
  }
}

TEST_CASE("blockwise: constant blocks are handled by the ridge term") {
  const GrayImage flat(32, 32, 60.0);
  const auto p = fit_blockwise(flat, textured(23, 32, 32), Family::kGaussianRbf);
  for (double a : p.alpha) CHECK(std::isfinite(a));
}

TEST_CASE("blockwise: identity target fits better than gamma 0.5") {
  double ident = 0.0, gam = 0.0;
  int wins = 0;
  for (int i = 0; i < 20; ++i) {
    const GrayImage src = textured(400 + i, 64, 64, 15, 240);
    const double a = fit_blockwise(src, src, Family::kGaussianRbf).residual_pe;
    const double b = fit_blockwise(src, gamma(src, 0.5), Family::kGaussianRbf).residual_pe;
    ident += a;
    gam += b;
    wins += a < b;
  }
  CHECK(ident < gam);
  CHECK(wins >= 15);
}

TEST_CASE("model_pair") {
  const GrayImage a = textured(31);
  SUBCASE("identical images") {
    for (Family f : {Family::kLegendre, Family::kChebyshev}) {
      const auto p = model_pair(a, a, f, {});
      CHECK(p.alpha_ab.residual_pe < 1e-6);
      CHECK(p.alpha_ba.residual_pe < 1e-6);
      for (std::size_t h = 0; h < p.alpha_ab.alpha.size(); ++h)
        CHECK(p.alpha_ab.alpha[h] == doctest::Approx(p.alpha_ba.alpha[h]));
    }
  }
  SUBCASE("original and brightened") {
    const GrayImage b = brighten(a, 1.3, -12.0);
    const auto p = model_pair(a, b, Family::kLegendre, {});
    CHECK(p.alpha_ab.residual_pe < 1e-3);
    CHECK(p.alpha_ba.residual_pe < 1e-3);
    CHECK(p.alpha_ab.converged);
    CHECK(p.alpha_ba.converged);
  }
  SUBCASE("dimensions per family and direction convention") {
    const GrayImage b = gamma(a, 0.7);
    for (Family f : kAllFamilies) {
      const auto p = model_pair(a, b, f, {});
      CHECK(p.alpha_ab.alpha.size() == static_cast<std::size_t>(family_dim(f)));
      CHECK(p.alpha_ba.alpha.size() == static_cast<std::size_t>(family_dim(f)));
      const auto direct = fit_direction(a, b, f, {});
      CHECK(direct.alpha == p.alpha_ab.alpha);
    }
    // RBF: alpha_ab comes from b's kernel design explaining a.
    CHECK(fit_direction(a, b, Family::kBumpRbf, {}).alpha ==
          fit_blockwise(b, a, Family::kBumpRbf).alpha);
  }
  SUBCASE("PairFitter agrees with direct fits") {
    const std::vector<GrayImage> imgs = {a, gamma(a, 0.7), brighten(a, 1.1, 5.0)};
    for (Family f : {Family::kLegendre, Family::kGabor}) {
      const PairFitter fitter(imgs, f, {});
      CHECK(fitter.fit(0, 2).alpha == fit_direction(imgs[0], imgs[2], f, {}).alpha);
      CHECK(fitter.fit(1, 0).alpha == fit_direction(imgs[1], imgs[0], f, {}).alpha);
    }
  }
}

TEST_CASE("parameter CSV") {
  ParamVector p;
  p.family = Family::kGabor;
  p.alpha = {0.5, -1.0, 2.0, 0.25};
  p.residual_pe = 0.125;
  std::ostringstream out;
  write_param_csv(out, {{"0-1", "forward", p}});
  CHECK(out.str() ==
        "pair,direction,family,alpha_1,alpha_2,alpha_3,alpha_4,residual_pe\n"
        "0-1,forward,gabor,0.5,-1,2,0.25,0.125\n");
}
