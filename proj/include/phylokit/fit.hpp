#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "phylokit/basis.hpp"
#include "phylokit/image.hpp"

namespace phylokit::basisfit {

struct IceSettings {
  double lambda = 1e-6;
  int max_iters = 30;
  double tol = 1e-6;

  void validate() const;  // lambda >= 0, max_iters >= 1, tol > 0
};

struct ParamVector {
  Family family = Family::kLegendre;
  std::vector<double> alpha;
  double residual_pe = 0.0;  // mean squared residual, normalized intensity units
  int iterations = 0;        // ICE iterations used; 0 for blockwise fits
  bool converged = true;
};

// Basis responses of one image, precomputed so that a fit over many pairs
// evaluates each image once. rows[h][p] is B_h at pixel p.
struct BasisStack {
  Family family = Family::kLegendre;
  int width = 0;
  int height = 0;
  std::vector<double> normalized;         // intensities in [-1, 1]
  std::vector<std::vector<double>> rows;  // empty for RBF families
};

BasisStack make_basis_stack(const imageops::GrayImage& img, Family family);

// Iterative inverse-compositional estimate of alpha in
//   src(p) ~ sum_h alpha_h * B_h[tgt(p)]
// for the polynomial and Gabor families. Each iteration solves
//   delta = (J_S J_S^T + lambda I)^-1 J_S E
// with J_S the source-side basis and E the current modeling error, and
// composes the inverse increment into alpha (see fit.cpp). residual_pe never
// increases from one accepted iteration to the next.
ParamVector fit_ice(const imageops::GrayImage& src, const imageops::GrayImage& tgt, Family family,
                    const IceSettings& settings);
ParamVector fit_ice(const BasisStack& src, const BasisStack& tgt, const IceSettings& settings);

// Same fit, additionally reporting residual_pe after every accepted iteration
// (index 0 = initial value).
ParamVector fit_ice_traced(const BasisStack& src, const BasisStack& tgt,
                           const IceSettings& settings, std::vector<double>& pe_trace);

inline constexpr double kBlockRidge = 1e-6;
inline constexpr int kRbfBlock = 16;

// Per-block solution of the ridge system tgt_q ~ Phi_q alpha_q where
// Phi_q[p][k] = K(x_p - mu_q, x_k - mu_q), x the normalized source block and
// mu_q its mean. One coefficient per block pixel.
struct BlockFit {
  std::vector<double> alpha;
  double sse = 0.0;       // over unpadded pixels
  int valid_pixels = 0;
};

std::vector<double> rbf_design_matrix(Family family, const std::vector<double>& src_block);
BlockFit fit_block(Family family, const imageops::Block& src, const imageops::Block& tgt,
                   double ridge = kBlockRidge);

// Blockwise local least squares for the RBF families. alpha is the mean of the
// per-block alphas; residual_pe uses the per-block fits.
ParamVector fit_blockwise(const imageops::GrayImage& src, const imageops::GrayImage& tgt,
                          Family family, int block = kRbfBlock);

// alpha_ab explains a through the basis expansion of b; alpha_ba the reverse.
struct PairFit {
  ParamVector alpha_ab;
  ParamVector alpha_ba;
};

ParamVector fit_direction(const imageops::GrayImage& a, const imageops::GrayImage& b,
                          Family family, const IceSettings& settings);
PairFit model_pair(const imageops::GrayImage& a, const imageops::GrayImage& b, Family family,
                   const IceSettings& settings);

// Caches basis stacks per image so that n images cost n basis evaluations.
class PairFitter {
 public:
  PairFitter(const std::vector<imageops::GrayImage>& images, Family family,
             const IceSettings& settings);

  // alpha explaining image a via the basis expansion of image b.
  ParamVector fit(int a, int b) const;
  Family family() const { return family_; }

 private:
  std::vector<imageops::GrayImage> images_;
  Family family_;
  IceSettings settings_;
  std::vector<BasisStack> stacks_;
};

// CSV rows: pair,direction,family,alpha_1..alpha_m,residual_pe
struct ParamRow {
  std::string pair;
  std::string direction;
  ParamVector params;
};
void write_param_csv(std::ostream& out, const std::vector<ParamRow>& rows);

}  // namespace phylokit::basisfit
