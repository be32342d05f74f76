#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "phylokit/error.hpp"
#include "phylokit/fit.hpp"

namespace phylokit::basisfit {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Index of the degree-1 polynomial, which carries the gain of the identity map.
constexpr int kGainIndex = 1;
constexpr double kMinStep = 1.0 / 64.0;

void require_same_size(const imageops::GrayImage& a, const imageops::GrayImage& b) {
  if (a.empty() || b.empty()) fail(ErrorCode::kDegenerateInput, "empty image");
  if (a.width() != b.width() || a.height() != b.height())
    fail(ErrorCode::kInvalidArgument, "image dimensions differ: " + std::to_string(a.width()) +
                                          "x" + std::to_string(a.height()) + " vs " +
                                          std::to_string(b.width()) + "x" +
                                          std::to_string(b.height()));
}

MatrixXd rows_matrix(const BasisStack& s) {
  const Eigen::Index m = static_cast<Eigen::Index>(s.rows.size());
  const Eigen::Index n = static_cast<Eigen::Index>(s.normalized.size());
  MatrixXd out(m, n);
  for (Eigen::Index h = 0; h < m; ++h)
    out.row(h) = Eigen::Map<const VectorXd>(s.rows[h].data(), n).transpose();
  return out;
}

// Inverse-compositional update. For the polynomial families the increment is
// an affine-in-alpha warp whose gain sits on the degree-1 coefficient; its
// inverse rescales by 1 / (1 + delta_gain). Gabor responses have no identity
// element, so the increment is subtracted directly.
bool compose(Family family, const VectorXd& alpha, const VectorXd& delta, VectorXd& out) {
  if (!is_polynomial(family)) {
    out = alpha - delta;
    return true;
  }
  const double g = 1.0 + delta[kGainIndex];
  if (std::abs(g) < 1e-12) return false;
  out = (alpha - delta) / g;
  out[kGainIndex] = alpha[kGainIndex] / g;
  return true;
}

}  // namespace

void IceSettings::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    fail(ErrorCode::kParamDomain, "lambda must be finite and >= 0");
  if (max_iters < 1) fail(ErrorCode::kParamDomain, "max_iters must be >= 1");
  if (!(tol > 0.0) || !std::isfinite(tol)) fail(ErrorCode::kParamDomain, "tol must be > 0");
}

BasisStack make_basis_stack(const imageops::GrayImage& img, Family family) {
  if (img.empty()) fail(ErrorCode::kDegenerateInput, "empty image");
  BasisStack s;
  s.family = family;
  s.width = img.width();
  s.height = img.height();
  s.normalized = imageops::normalize_unit(img);
  if (is_polynomial(family)) {
    s.rows.assign(family_dim(family), std::vector<double>(s.normalized.size()));
    for (std::size_t p = 0; p < s.normalized.size(); ++p) {
      const double x = std::clamp(s.normalized[p], -1.0, 1.0);
      for (int h = 0; h < family_dim(family); ++h) s.rows[h][p] = eval_poly(family, h, x);
    }
  } else if (family == Family::kGabor) {
    s.rows = gabor_bank(s.normalized, s.width, s.height);
  }
  return s;
}

ParamVector fit_ice_traced(const BasisStack& src, const BasisStack& tgt,
                           const IceSettings& settings, std::vector<double>& pe_trace) {
  settings.validate();
  if (src.family != tgt.family) fail(ErrorCode::kInvalidArgument, "basis families differ");
  const Family family = src.family;
  if (is_rbf(family)) fail(ErrorCode::kInvalidArgument, "RBF families are fitted blockwise");
  if (src.width != tgt.width || src.height != tgt.height)
    fail(ErrorCode::kInvalidArgument, "image dimensions differ");

  const Eigen::Index n = static_cast<Eigen::Index>(src.normalized.size());
  const MatrixXd bs = rows_matrix(src);
  const MatrixXd bt = rows_matrix(tgt);
  const Eigen::Map<const VectorXd> s(src.normalized.data(), n);
  const Eigen::Index m = bs.rows();

  MatrixXd hess = bs * bs.transpose();
  hess.diagonal().array() += settings.lambda;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(hess);
  const double emax = eig.eigenvalues().maxCoeff(), emin = eig.eigenvalues().minCoeff();
  if (!(emin > 1e-12 * std::max(emax, 1.0)))
    fail(ErrorCode::kNumerical, "regularized Hessian is singular");
  const Eigen::LDLT<MatrixXd> solver(hess);

  auto pe = [&](const VectorXd& a) { return (s - bt.transpose() * a).squaredNorm() / n; };

  VectorXd alpha = VectorXd::Zero(m);
  if (is_polynomial(family)) alpha[kGainIndex] = 1.0;
  double cur = pe(alpha);
  pe_trace.assign(1, cur);

  ParamVector out;
  out.family = family;
  out.converged = false;
  int it = 0;
  VectorXd cand(m);
  while (it < settings.max_iters) {
    ++it;
    const VectorXd err = bt.transpose() * alpha - s;
    const VectorXd delta = solver.solve(bs * err);
    if (!delta.allFinite()) fail(ErrorCode::kNumerical, "non-finite ICE increment");
    // Step halving keeps the residual from growing.
    double step = 1.0, next = cur;
    bool accepted = false;
    VectorXd used;
    for (; step >= kMinStep; step *= 0.5) {
      used = delta * step;
      if (!compose(family, alpha, used, cand)) continue;
      next = pe(cand);
      if (std::isfinite(next) && next <= cur) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.converged = true;
      break;
    }
    alpha = cand;
    cur = next;
    pe_trace.push_back(cur);
    if (used.norm() < settings.tol) {
      out.converged = true;
      break;
    }
  }
  if (!alpha.allFinite()) fail(ErrorCode::kNumerical, "non-finite ICE coefficients");
  out.alpha.assign(alpha.data(), alpha.data() + m);
  out.residual_pe = cur;
  out.iterations = it;
  return out;
}

ParamVector fit_ice(const BasisStack& src, const BasisStack& tgt, const IceSettings& settings) {
  std::vector<double> trace;
  return fit_ice_traced(src, tgt, settings, trace);
}

ParamVector fit_ice(const imageops::GrayImage& src, const imageops::GrayImage& tgt, Family family,
                    const IceSettings& settings) {
  require_same_size(src, tgt);
  if (is_rbf(family)) fail(ErrorCode::kInvalidArgument, "RBF families are fitted blockwise");
  return fit_ice(make_basis_stack(src, family), make_basis_stack(tgt, family), settings);
}

std::vector<double> rbf_design_matrix(Family family, const std::vector<double>& src_block) {
  if (!is_rbf(family)) fail(ErrorCode::kInvalidArgument, "design matrix needs an RBF family");
  const std::size_t n = src_block.size();
  double mu = 0.0;
  for (double v : src_block) mu += v;
  mu /= static_cast<double>(n);
  std::vector<double> phi(n * n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t k = 0; k < n; ++k)
      phi[p * n + k] = rbf_kernel(family, src_block[p] - mu, src_block[k] - mu);
  return phi;
}

BlockFit fit_block(Family family, const imageops::Block& src, const imageops::Block& tgt,
                   double ridge) {
  if (src.size != tgt.size || src.values.size() != tgt.values.size())
    fail(ErrorCode::kInvalidArgument, "block sizes differ");
  if (!(ridge > 0.0)) fail(ErrorCode::kParamDomain, "ridge weight must be positive");
  const Eigen::Index n = static_cast<Eigen::Index>(src.values.size());
  std::vector<double> x(src.values.size()), t(tgt.values.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = imageops::normalize_unit(src.values[i]);
    t[i] = imageops::normalize_unit(tgt.values[i]);
  }
  const auto phi_rows = rbf_design_matrix(family, x);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      phi(phi_rows.data(), n, n);
  // Ridge as an augmented least-squares problem [phi; sqrt(ridge) I] a = [t; 0].
  MatrixXd aug(2 * n, n);
  aug.topRows(n) = phi;
  aug.bottomRows(n) = MatrixXd::Identity(n, n) * std::sqrt(ridge);
  VectorXd rhs = VectorXd::Zero(2 * n);
  rhs.head(n) = Eigen::Map<const VectorXd>(t.data(), n);
  const VectorXd a = aug.householderQr().solve(rhs);
  if (!a.allFinite()) fail(ErrorCode::kNumerical, "non-finite block solution");

  BlockFit out;
  out.alpha.assign(a.data(), a.data() + n);
  const VectorXd fitted = phi * a;
  for (int y = 0; y < src.size; ++y) {
    for (int xx = 0; xx < src.size; ++xx) {
      if (!src.is_valid(xx, y)) continue;
      const std::size_t p = static_cast<std::size_t>(y) * src.size + xx;
      const double r = t[p] - fitted[static_cast<Eigen::Index>(p)];
      out.sse += r * r;
      ++out.valid_pixels;
    }
  }
  return out;
}

ParamVector fit_blockwise(const imageops::GrayImage& src, const imageops::GrayImage& tgt,
                          Family family, int block) {
  require_same_size(src, tgt);
  if (!is_rbf(family)) fail(ErrorCode::kInvalidArgument, "fit_blockwise needs an RBF family");
  const auto sb = imageops::tessellate(src, block);
  const auto tb = imageops::tessellate(tgt, block);
  ParamVector out;
  out.family = family;
  out.alpha.assign(static_cast<std::size_t>(block) * block, 0.0);
  double sse = 0.0;
  long valid = 0;
  for (std::size_t q = 0; q < sb.size(); ++q) {
    const BlockFit f = fit_block(family, sb[q], tb[q]);
    for (std::size_t k = 0; k < f.alpha.size(); ++k) out.alpha[k] += f.alpha[k];
    sse += f.sse;
    valid += f.valid_pixels;
  }
  for (double& a : out.alpha) a /= static_cast<double>(sb.size());
  out.residual_pe = sse / static_cast<double>(valid);
  return out;
}

ParamVector fit_direction(const imageops::GrayImage& a, const imageops::GrayImage& b,
                          Family family, const IceSettings& settings) {
  if (is_rbf(family)) return fit_blockwise(b, a, family);
  return fit_ice(a, b, family, settings);
}

PairFit model_pair(const imageops::GrayImage& a, const imageops::GrayImage& b, Family family,
                   const IceSettings& settings) {
  return {fit_direction(a, b, family, settings), fit_direction(b, a, family, settings)};
}

PairFitter::PairFitter(const std::vector<imageops::GrayImage>& images, Family family,
                       const IceSettings& settings)
    : images_(images), family_(family), settings_(settings) {
  settings_.validate();
  for (std::size_t i = 1; i < images_.size(); ++i) require_same_size(images_[0], images_[i]);
  if (!is_rbf(family))
    for (const auto& img : images_) stacks_.push_back(make_basis_stack(img, family));
}

ParamVector PairFitter::fit(int a, int b) const {
  const int n = static_cast<int>(images_.size());
  if (a < 0 || b < 0 || a >= n || b >= n) fail(ErrorCode::kInvalidArgument, "image index out of range");
  if (is_rbf(family_)) return fit_blockwise(images_[b], images_[a], family_);
  return fit_ice(stacks_[a], stacks_[b], settings_);
}

void write_param_csv(std::ostream& out, const std::vector<ParamRow>& rows) {
  std::size_t m = 0;
  for (const auto& r : rows) m = std::max(m, r.params.alpha.size());
  out << "pair,direction,family";
  for (std::size_t i = 1; i <= m; ++i) out << ",alpha_" << i;
  out << ",residual_pe\n";
  char buf[32];
  for (const auto& r : rows) {
    out << r.pair << ',' << r.direction << ',' << family_name(r.params.family);
    for (std::size_t i = 0; i < m; ++i) {
      if (i < r.params.alpha.size()) {
        std::snprintf(buf, sizeof buf, "%.17g", r.params.alpha[i]);
        out << ',' << buf;
      } else {
        out << ',';
      }
    }
    std::snprintf(buf, sizeof buf, "%.17g", r.params.residual_pe);
    out << ',' << buf << '\n';
  }
}

}  // namespace phylokit::basisfit
