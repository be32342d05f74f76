#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "phylokit/basis.hpp"
#include "phylokit/fit.hpp"
#include "phylokit/image.hpp"
#include "phylokit/transforms.hpp"

namespace phylokit::likelihood {

inline constexpr double kBandwidthFloor = 1e-3;
inline constexpr double kDensityFloor = 1e-300;

// Product-Gaussian Parzen estimate over a fixed sample set.
struct ParzenSide {
  std::vector<std::vector<double>> samples;
  std::vector<double> bandwidth;  // per dimension, > 0

  std::size_t dim() const { return bandwidth.size(); }
};

// Silverman's rule per dimension, h_d = 1.06 * sd_d * N^(-1/5), floored at
// kBandwidthFloor. sd uses the N-1 denominator. Needs >= 2 samples.
std::vector<double> silverman_bandwidth(const std::vector<std::vector<double>>& samples);
ParzenSide fit_parzen(std::vector<std::vector<double>> samples);

double log_density(const ParzenSide& side, const std::vector<double>& alpha);
double eval_density(const ParzenSide& side, const std::vector<double>& alpha);

struct TrainingMeta {
  std::size_t n_pairs = 0;
  std::size_t n_failed = 0;
  basisfit::IceSettings settings;
};

// Forward and reverse parameter densities for one basis family. Both sides
// share the bandwidth vector estimated from the pooled samples.
struct DensityModel {
  basisfit::Family family = basisfit::Family::kLegendre;
  std::vector<std::vector<double>> forward_samples;
  std::vector<std::vector<double>> reverse_samples;
  std::vector<double> bandwidth;
  TrainingMeta meta;

  ParzenSide forward() const { return {forward_samples, bandwidth}; }
  ParzenSide reverse() const { return {reverse_samples, bandwidth}; }
  DensityModel swapped() const;
  void validate() const;
};

DensityModel make_model(basisfit::Family family, std::vector<std::vector<double>> forward,
                        std::vector<std::vector<double>> reverse);

// Lambda = p_f(alpha) / p_b(alpha), computed as exp(log p_f - log p_b) with both
// densities floored at kDensityFloor and the log ratio clamped to +-700.
double log_likelihood_ratio(const DensityModel& model, const std::vector<double>& alpha);
double likelihood_ratio(const DensityModel& model, const std::vector<double>& alpha);

struct TrainingPair {
  imageops::GrayImage original;
  imageops::GrayImage transformed;
};

// n deterministic pairs: procedural originals of width x height and one
// sampled transform of the given class each. Pair i depends only on
// (seed, i).
std::vector<TrainingPair> synthetic_pairs(std::size_t n, imageops::TransformClass cls,
                                          std::uint64_t seed, int width = 64, int height = 64);

// Fits every pair in both directions: alpha(original | transformed) is a
// forward sample, alpha(transformed | original) a reverse one. Pairs whose fit
// throws or yields non-finite values are skipped; more than half failing
// raises kTraining. Samples are kept in pair order regardless of jobs.
DensityModel train_model(const std::vector<TrainingPair>& pairs, basisfit::Family family,
                         const basisfit::IceSettings& settings, unsigned jobs = 1);

}  // namespace phylokit::likelihood
