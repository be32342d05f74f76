#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "phylokit/density.hpp"
#include "phylokit/error.hpp"
#include "phylokit/parallel.hpp"
#include "phylokit/rng.hpp"

namespace phylokit::likelihood {
namespace {

constexpr double kMaxLogRatio = 700.0;

void check_samples(const std::vector<std::vector<double>>& samples, std::size_t dim,
                   const char* what) {
  for (const auto& s : samples) {
    if (s.size() != dim)
      fail(ErrorCode::kInvalidArgument, std::string(what) + " samples have unequal dimensions");
    for (double v : s)
      if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, std::string(what) + " sample is not finite");
  }
}

}  // namespace

std::vector<double> silverman_bandwidth(const std::vector<std::vector<double>>& samples) {
  if (samples.size() < 2) fail(ErrorCode::kInsufficientData, "Parzen fit needs at least 2 samples");
  const std::size_t dim = samples.front().size();
  if (dim == 0) fail(ErrorCode::kInvalidArgument, "samples have zero dimension");
  check_samples(samples, dim, "Parzen");
  const double n = static_cast<double>(samples.size());
  std::vector<double> h(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (const auto& s : samples) mean += s[d];
    mean /= n;
    double ss = 0.0;
    for (const auto& s : samples) ss += (s[d] - mean) * (s[d] - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    h[d] = std::max(1.06 * sd * std::pow(n, -0.2), kBandwidthFloor);
  }
  return h;
}

ParzenSide fit_parzen(std::vector<std::vector<double>> samples) {
  auto h = silverman_bandwidth(samples);
  return {std::move(samples), std::move(h)};
}

double log_density(const ParzenSide& side, const std::vector<double>& alpha) {
  const std::size_t dim = side.dim();
  if (side.samples.empty()) fail(ErrorCode::kInsufficientData, "density has no samples");
  if (alpha.size() != dim)
    fail(ErrorCode::kInvalidArgument, "query has dimension " + std::to_string(alpha.size()) +
                                          ", density expects " + std::to_string(dim));
  double norm = 0.0;
  for (double h : side.bandwidth) norm += std::log(h);
  norm += 0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi);
  std::vector<double> terms(side.samples.size());
  for (std::size_t k = 0; k < side.samples.size(); ++k) {
    const auto& s = side.samples[k];
    double q = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double z = (alpha[d] - s[d]) / side.bandwidth[d];
      q += z * z;
    }
    terms[k] = -0.5 * q;
  }
  // Summation in sorted order keeps the value independent of sample order.
  std::sort(terms.begin(), terms.end());
  const double top = terms.back();
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc) - std::log(static_cast<double>(terms.size())) - norm;
}

double eval_density(const ParzenSide& side, const std::vector<double>& alpha) {
  return std::exp(log_density(side, alpha));
}

DensityModel DensityModel::swapped() const {
  DensityModel out = *this;
  std::swap(out.forward_samples, out.reverse_samples);
  return out;
}

void DensityModel::validate() const {
  const std::size_t m = static_cast<std::size_t>(basisfit::family_dim(family));
  if (forward_samples.empty() || reverse_samples.empty())
    fail(ErrorCode::kInsufficientData, "model needs forward and reverse samples");
  if (bandwidth.size() != m)
    fail(ErrorCode::kInvalidArgument, "bandwidth length " + std::to_string(bandwidth.size()) +
                                          " does not match m = " + std::to_string(m));
  for (double h : bandwidth)
    if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorCode::kInvalidArgument, "bandwidth must be > 0");
  check_samples(forward_samples, m, "forward");
  check_samples(reverse_samples, m, "reverse");
}

DensityModel make_model(basisfit::Family family, std::vector<std::vector<double>> forward,
                        std::vector<std::vector<double>> reverse) {
  if (forward.empty() || reverse.empty())
    fail(ErrorCode::kInsufficientData, "model needs forward and reverse samples");
  std::vector<std::vector<double>> pooled = forward;
  pooled.insert(pooled.end(), reverse.begin(), reverse.end());
  DensityModel m;
  m.family = family;
  m.bandwidth = silverman_bandwidth(pooled);
  m.forward_samples = std::move(forward);
  m.reverse_samples = std::move(reverse);
  m.validate();
  return m;
}

double log_likelihood_ratio(const DensityModel& model, const std::vector<double>& alpha) {
  const double floor = std::log(kDensityFloor);
  const double lf = std::max(log_density(model.forward(), alpha), floor);
  const double lb = std::max(log_density(model.reverse(), alpha), floor);
  return std::clamp(lf - lb, -kMaxLogRatio, kMaxLogRatio);
}

double likelihood_ratio(const DensityModel& model, const std::vector<double>& alpha) {
  return std::exp(log_likelihood_ratio(model, alpha));
}

std::vector<TrainingPair> synthetic_pairs(std::size_t n, imageops::TransformClass cls,
                                          std::uint64_t seed, int width, int height) {
  std::vector<TrainingPair> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    TrainingPair p;
    p.original = imageops::quantize8(imageops::procedural_image(mix_seed(seed, 2 * i), width, height));
    Rng rng(mix_seed(seed, 2 * i + 1));
    const auto spec = imageops::sample_transform(cls, rng);
    p.transformed = imageops::quantize8(imageops::apply_transform(p.original, spec));
    pairs.push_back(std::move(p));
  }
  return pairs;
}

DensityModel train_model(const std::vector<TrainingPair>& pairs, basisfit::Family family,
                         const basisfit::IceSettings& settings, unsigned jobs) {
  settings.validate();
  if (pairs.size() < 2) fail(ErrorCode::kInsufficientData, "training needs at least 2 pairs");
  std::vector<std::optional<basisfit::PairFit>> fits(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    try {
      auto f = basisfit::model_pair(pairs[i].original, pairs[i].transformed, family, settings);
      auto finite = [](const basisfit::ParamVector& p) {
        return std::all_of(p.alpha.begin(), p.alpha.end(), [](double v) { return std::isfinite(v); });
      };
      if (finite(f.alpha_ab) && finite(f.alpha_ba)) fits[i] = std::move(f);
    } catch (const Error&) {
      // counted below
    }
  });
  std::vector<std::vector<double>> forward, reverse;
  std::size_t failed = 0;
  for (auto& f : fits) {
    if (!f) {
      ++failed;
      continue;
    }
    forward.push_back(std::move(f->alpha_ab.alpha));
    reverse.push_back(std::move(f->alpha_ba.alpha));
  }
  if (2 * failed > pairs.size())
    fail(ErrorCode::kTraining, std::to_string(failed) + " of " + std::to_string(pairs.size()) +
                                   " training pairs failed to fit");
  DensityModel model = make_model(family, std::move(forward), std::move(reverse));
  model.meta.n_pairs = pairs.size();
  model.meta.n_failed = failed;
  model.meta.settings = settings;
  return model;
}

}  // namespace phylokit::likelihood
