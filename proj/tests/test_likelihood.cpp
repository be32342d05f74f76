#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "phylokit/dataset_io.hpp"
#include "phylokit/density.hpp"
#include "phylokit/error.hpp"
#include "phylokit/rng.hpp"

using namespace phylokit;
using namespace phylokit::likelihood;
using basisfit::Family;

namespace {

double normal_pdf(double x, double mu, double h) {
  const double z = (x - mu) / h;
  return std::exp(-0.5 * z * z) / (h * std::sqrt(2.0 * std::numbers::pi));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

// Gabor-sized model whose samples differ only in the first coordinate.
DensityModel toy_model(std::vector<double> fwd, std::vector<double> rev, double h = 1.0) {
  DensityModel m;
  m.family = Family::kGabor;
  for (double v : fwd) m.forward_samples.push_back({v, 0.5, -0.5, 1.0});
  for (double v : rev) m.reverse_samples.push_back({v, 0.5, -0.5, 1.0});
  m.bandwidth = {h, 0.3, 0.3, 0.3};
  m.validate();
  return m;
}

std::vector<double> at(double x) { return {x, 0.5, -0.5, 1.0}; }

}  // namespace

TEST_CASE("parzen: point values") {
  const ParzenSide one{{{0.0}}, {1.0}};
  CHECK(eval_density(one, {0.0}) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));

  const ParzenSide two{{{-1.0}, {1.0}}, {0.7}};
  for (double x : {0.0, 0.3, 1.2, 2.5}) {
    const double expect = 0.5 * (normal_pdf(x, -1.0, 0.7) + normal_pdf(x, 1.0, 0.7));
    CHECK(eval_density(two, {x}) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(eval_density(two, {x}) == doctest::Approx(eval_density(two, {-x})).epsilon(1e-14));
  }

  const ParzenSide twod{{{0.0, 1.0}, {2.0, -1.0}}, {0.5, 2.0}};
  const double expect = 0.5 * (normal_pdf(0.4, 0.0, 0.5) * normal_pdf(0.2, 1.0, 2.0) +
                               normal_pdf(0.4, 2.0, 0.5) * normal_pdf(0.2, -1.0, 2.0));
  CHECK(eval_density(twod, {0.4, 0.2}) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("parzen: far tail underflows gracefully") {
  const ParzenSide one{{{0.0}}, {1.0}};
  const double d = eval_density(one, {10.0});
  CHECK(d < 1e-20);
  CHECK(d > 0.0);
  CHECK(log_density(one, {100.0}) == doctest::Approx(-5000.0 - 0.5 * std::log(2.0 * std::numbers::pi)));
}

TEST_CASE("parzen: integrates to one") {
  Rng rng(8);
  std::vector<std::vector<double>> s;
  for (int i = 0; i < 30; ++i) s.push_back({rng.normal() * 0.6 + (i % 2 ? 1.0 : -1.0)});
  const ParzenSide side = fit_parzen(s);
  const double lo = -12.0, hi = 12.0;
  const int n = 24000;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    sum += eval_density(side, {x}) * ((i == 0 || i == n) ? 0.5 : 1.0);
  }
  CHECK(std::abs(sum * (hi - lo) / n - 1.0) < 1e-3);

  std::vector<std::vector<double>> s2;
  for (int i = 0; i < 10; ++i) s2.push_back({rng.normal(), rng.normal() * 0.5});
  const ParzenSide side2 = fit_parzen(s2);
  const int m = 300;
  const double step = 16.0 / m;
  double sum2 = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      sum2 += eval_density(side2, {-8.0 + (i + 0.5) * step, -8.0 + (j + 0.5) * step});
  CHECK(std::abs(sum2 * step * step - 1.0) < 1e-3);
}

TEST_CASE("silverman bandwidth") {
  Rng rng(99);
  std::vector<std::vector<double>> s;
  for (int i = 0; i < 1000; ++i) s.push_back({rng.normal()});
  const double h = silverman_bandwidth(s)[0];
  CHECK(std::abs(h / (1.06 * std::pow(1000.0, -0.2)) - 1.0) < 0.05);

  const std::vector<std::vector<double>> same(20, {0.25, 3.0});
  const auto hf = silverman_bandwidth(same);
  CHECK(hf[0] == kBandwidthFloor);
  CHECK(hf[1] == kBandwidthFloor);

  CHECK(code_of([] { silverman_bandwidth({{1.0}}); }) == ErrorCode::kInsufficientData);
  CHECK(code_of([] { fit_parzen({}); }) == ErrorCode::kInsufficientData);
}

TEST_CASE("likelihood ratio algebra") {
  // log N(0;0,1) - log N(0;4,1) = 8
  const auto m = toy_model({0.0}, {4.0});
  CHECK(std::abs(likelihood_ratio(m, at(0.0)) / std::exp(8.0) - 1.0) < 1e-6);
  CHECK(std::abs(likelihood_ratio(m, at(4.0)) / std::exp(-8.0) - 1.0) < 1e-6);
  CHECK(likelihood_ratio(m, at(2.0)) == doctest::Approx(1.0).epsilon(1e-12));

  const auto same = toy_model({0.1, 0.9}, {0.1, 0.9});
  CHECK(likelihood_ratio(same, at(0.37)) == 1.0);

  Rng rng(3);
  const auto asym = toy_model({0.0, 0.2, 1.0}, {0.5, 2.0});
  for (int i = 0; i < 50; ++i) {
    const auto a = at(rng.uniform(-3.0, 3.0));
    CHECK(likelihood_ratio(asym, a) * likelihood_ratio(asym.swapped(), a) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("likelihood ratio: floors and clamps") {
  const auto m = toy_model({0.0}, {1.0}, 1e-3);
  const double far = likelihood_ratio(m, at(1e4));
  CHECK(far == 1.0);
  const double near = likelihood_ratio(m, at(0.0));
  CHECK(std::isfinite(near));
  CHECK(log_likelihood_ratio(m, at(0.0)) <= 700.0);
  CHECK(likelihood_ratio(m, at(1.0)) > 0.0);
}

TEST_CASE("likelihood ratio is invariant to sample order") {
  Rng rng(41);
  std::vector<double> f, r;
  for (int i = 0; i < 40; ++i) f.push_back(rng.normal());
  for (int i = 0; i < 40; ++i) r.push_back(rng.normal() + 0.5);
  const auto m1 = toy_model(f, r);
  std::reverse(f.begin(), f.end());
  std::rotate(r.begin(), r.begin() + 13, r.end());
  const auto m2 = toy_model(f, r);
  for (int i = 0; i < 20; ++i) {
    const auto a = at(rng.uniform(-2.0, 2.0));
    CHECK(likelihood_ratio(m1, a) == likelihood_ratio(m2, a));
  }
}

TEST_CASE("model validation") {
  auto m = toy_model({0.0}, {1.0});
  m.bandwidth.pop_back();
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::kInvalidArgument);
  m = toy_model({0.0}, {1.0});
  m.bandwidth[0] = 0.0;
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::kInvalidArgument);
  m = toy_model({0.0}, {1.0});
  m.reverse_samples.clear();
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::kInsufficientData);
  CHECK(code_of([] { make_model(Family::kGabor, {{1, 2, 3, 4}}, {}); }) == ErrorCode::kInsufficientData);
  const auto made = make_model(Family::kGabor, {{1, 2, 3, 4}}, {{2, 2, 3, 5}});
  CHECK(made.bandwidth.size() == 4);
  CHECK(made.bandwidth[1] == kBandwidthFloor);
}

TEST_CASE("training") {
  const auto pairs = synthetic_pairs(40, imageops::TransformClass::kPhotometric, 77, 48, 48);
  REQUIRE(pairs.size() == 40);
  const auto again = synthetic_pairs(40, imageops::TransformClass::kPhotometric, 77, 48, 48);
  CHECK(pairs[7].transformed == again[7].transformed);

  const auto m = train_model(pairs, Family::kLegendre, {});
  CHECK(m.meta.n_pairs == 40);
  CHECK(m.meta.n_failed == 0);
  CHECK(m.forward_samples.size() == 40);
  CHECK(m.reverse_samples.size() == 40);
  CHECK(m.forward_samples[0].size() == 6);
  CHECK(m.bandwidth.size() == 6);

  const auto direct = basisfit::model_pair(pairs[3].original, pairs[3].transformed, Family::kLegendre, {});
  CHECK(m.forward_samples[3] == direct.alpha_ab.alpha);
  CHECK(m.reverse_samples[3] == direct.alpha_ba.alpha);

  const std::string bytes = io::model_to_json(m);
  CHECK(io::model_to_json(train_model(pairs, Family::kLegendre, {})) == bytes);
  CHECK(io::model_to_json(train_model(pairs, Family::kLegendre, {}, 3)) == bytes);

  const auto back = io::model_from_json(bytes);
  CHECK(io::model_to_json(back) == bytes);
  CHECK(back.forward_samples == m.forward_samples);
  CHECK(back.bandwidth == m.bandwidth);
  CHECK(likelihood_ratio(back, m.forward_samples[0]) == likelihood_ratio(m, m.forward_samples[0]));
}

TEST_CASE("training failures") {
  const auto pairs = synthetic_pairs(1, imageops::TransformClass::kPhotometric, 1, 32, 32);
  CHECK(code_of([&] { train_model(pairs, Family::kLegendre, {}); }) == ErrorCode::kInsufficientData);
  // Gabor needs images at least as large as its largest kernel.
  const auto tiny = synthetic_pairs(4, imageops::TransformClass::kPhotometric, 1, 12, 12);
  CHECK(code_of([&] { train_model(tiny, Family::kGabor, {}); }) == ErrorCode::kTraining);
}

TEST_CASE("model JSON rejects bad documents") {
  CHECK(code_of([] { io::model_from_json("{"); }) == ErrorCode::kSchema);
  CHECK(code_of([] { io::model_from_json("{\"family\":\"legendre\"}"); }) == ErrorCode::kSchema);
}
