#include <algorithm>
#include <numeric>

#include "phylokit/error.hpp"
#include "phylokit/parallel.hpp"
#include "phylokit/phylogeny.hpp"

namespace phylokit::phylogeny {
namespace {

void check_square(const SimilarityMatrix& s, const IndicatorMatrix& b) {
  if (s.n() != b.n()) fail(ErrorCode::kInvalidArgument, "similarity and indicator sizes differ");
}

// Reverse post-order of a depth-first search from root, children visited in
// ascending id. Only nodes reachable through B appear.
std::vector<int> dfs_topological(const IndicatorMatrix& b, int root) {
  const int n = b.n();
  std::vector<char> seen(n, 0);
  std::vector<int> post;
  std::vector<std::pair<int, int>> stack{{root, 0}};
  seen[root] = 1;
  while (!stack.empty()) {
    auto& [u, next] = stack.back();
    while (next < n && (seen[next] || u == next || b(u, next) == 0)) ++next;
    if (next == n) {
      post.push_back(u);
      stack.pop_back();
      continue;
    }
    const int v = next++;
    seen[v] = 1;
    stack.emplace_back(v, 0);
  }
  std::reverse(post.begin(), post.end());
  return post;
}

}  // namespace

std::vector<int> PhylogenyTree::parents() const {
  std::vector<int> p(n, -1);
  for (const auto& [u, v] : edges)
    if (v >= 0 && v < n) p[v] = u;
  return p;
}

bool PhylogenyTree::is_valid() const {
  if (n < 1 || root < 0 || root >= n) return false;
  std::vector<int> parent(n, -1);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n || u == v) return false;
    if (parent[v] >= 0) return false;
    parent[v] = u;
  }
  if (parent[root] >= 0) return false;
  if (static_cast<int>(edges.size()) != n - 1) return false;
  // Every node must reach the root by following parents.
  for (int v = 0; v < n; ++v) {
    int cur = v, steps = 0;
    while (cur != root) {
      cur = parent[cur];
      if (cur < 0 || ++steps > n) return false;
    }
  }
  return true;
}

SimilarityMatrix similarity_matrix(const std::vector<imageops::GrayImage>& images,
                                   basisfit::Family family, const likelihood::DensityModel& model,
                                   const basisfit::IceSettings& settings, unsigned jobs,
                                   std::size_t* fit_count) {
  const int n = static_cast<int>(images.size());
  if (n < 2) fail(ErrorCode::kInsufficientData, "similarity matrix needs at least 2 images");
  if (model.family != family)
    fail(ErrorCode::kInvalidArgument, "model was trained for " +
                                          std::string(basisfit::family_name(model.family)) +
                                          ", not " + std::string(basisfit::family_name(family)));
  const basisfit::PairFitter fitter(images, family, settings);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) pairs.emplace_back(i, j);
  std::vector<double> values(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t k) {
    const auto& [i, j] = pairs[k];
    values[k] = likelihood::likelihood_ratio(model, fitter.fit(i, j).alpha);
  });
  SimilarityMatrix s(n, 0.0);
  for (std::size_t k = 0; k < pairs.size(); ++k) s(pairs[k].first, pairs[k].second) = values[k];
  if (fit_count) *fit_count = pairs.size();
  return s;
}

IndicatorMatrix indicator_matrix(const SimilarityMatrix& s, double tau) {
  if (!(tau > 0.0)) fail(ErrorCode::kParamDomain, "threshold tau must be > 0");
  const int n = s.n();
  IndicatorMatrix b(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || s(i, j) < tau) continue;
      if (s(i, j) > s(j, i) || (s(i, j) == s(j, i) && i < j)) b(i, j) = 1;
    }
  }
  return b;
}

std::vector<int> root_candidates(const IndicatorMatrix& b, int k) {
  const int n = b.n();
  if (k < 1 || k > n)
    fail(ErrorCode::kInvalidArgument, "k must lie in [1, " + std::to_string(n) + "]");
  std::vector<int> sums(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) sums[i] += b(i, j);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int c) { return sums[a] > sums[c]; });
  order.resize(k);
  return order;
}

PhylogenyTree span_ipt(const IndicatorMatrix& b, const SimilarityMatrix& s, int root,
                       SpanStats* stats) {
  check_square(s, b);
  const int n = b.n();
  if (root < 0 || root >= n) fail(ErrorCode::kInvalidArgument, "root id out of range");
  PhylogenyTree tree;
  tree.n = n;
  tree.root = root;
  std::size_t comparisons = 0;
  const auto order = dfs_topological(b, root);
  std::vector<char> placed(n, 0);
  placed[root] = 1;
  for (std::size_t idx = 1; idx < order.size(); ++idx) {
    const int v = order[idx];
    int best = -1;
    for (int i = 0; i < static_cast<int>(idx); ++i) {
      const int u = order[i];
      if (!b(u, v)) continue;
      ++comparisons;
      if (best < 0 || s(u, v) > s(best, v) || (s(u, v) == s(best, v) && u < best)) best = u;
    }
    tree.edges.emplace(best, v);
    placed[v] = 1;
  }
  for (int v = 0; v < n; ++v)
    if (!placed[v]) tree.edges.emplace(root, v);
  if (stats) stats->comparisons = comparisons;
  if (!tree.is_valid()) fail(ErrorCode::kInternal, "spanning produced an invalid tree");
  return tree;
}

Reconstruction reconstruct_from_similarity(SimilarityMatrix s, double tau, int k) {
  Reconstruction r;
  r.indicator = indicator_matrix(s, tau);
  r.candidates = root_candidates(r.indicator, k);
  for (int c : r.candidates) r.trees.push_back(span_ipt(r.indicator, s, c));
  r.similarity = std::move(s);
  return r;
}

Reconstruction reconstruct(const std::vector<imageops::GrayImage>& images,
                           basisfit::Family family, const likelihood::DensityModel& model,
                           const basisfit::IceSettings& settings, double tau, int k,
                           unsigned jobs) {
  if (!(tau > 0.0)) fail(ErrorCode::kParamDomain, "threshold tau must be > 0");
  if (k < 1 || k > static_cast<int>(images.size()))
    fail(ErrorCode::kInvalidArgument, "k must lie in [1, number of images]");
  return reconstruct_from_similarity(similarity_matrix(images, family, model, settings, jobs), tau, k);
}

}  // namespace phylokit::phylogeny
