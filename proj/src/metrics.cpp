#include <algorithm>
#include <cmath>
#include <set>

#include "phylokit/error.hpp"
#include "phylokit/metrics.hpp"

namespace phylokit::evalmetrics {
namespace {

std::set<std::pair<int, int>> edge_set(const Digraph& g) {
  std::set<std::pair<int, int>> out;
  for (const auto& [u, v] : g.edges) {
    if (u < 0 || v < 0 || u >= g.n_nodes || v >= g.n_nodes)
      fail(ErrorCode::kInvalidArgument, "edge endpoint outside the node set");
    if (u == v) fail(ErrorCode::kInvalidArgument, "self-loops are not allowed");
    out.emplace(u, v);
  }
  return out;
}

}  // namespace

Digraph as_digraph(const phylogeny::PhylogenyTree& tree) {
  return {tree.n, {tree.edges.begin(), tree.edges.end()}};
}

bool root_rank_hit(const std::vector<int>& candidates, int true_root, int k) {
  if (k < 1 || k > static_cast<int>(candidates.size()))
    fail(ErrorCode::kInvalidArgument, "rank k must lie in [1, number of candidates]");
  return std::find(candidates.begin(), candidates.begin() + k, true_root) != candidates.begin() + k;
}

double ipt_accuracy(const Digraph& recon, const Digraph& truth) {
  if (recon.n_nodes != truth.n_nodes)
    fail(ErrorCode::kInvalidArgument, "reconstruction and truth have different node counts");
  const auto r = edge_set(recon);
  const auto t = edge_set(truth);
  if (t.empty()) fail(ErrorCode::kUndefined, "ground truth has no edges");
  std::size_t hit = 0;
  for (const auto& e : t) hit += r.count(e);
  return static_cast<double>(hit) / static_cast<double>(t.size());
}

double ipt_accuracy(const phylogeny::PhylogenyTree& recon, const phylogeny::PhylogenyTree& truth) {
  return ipt_accuracy(as_digraph(recon), as_digraph(truth));
}

double von_neumann_entropy(const Digraph& graph) {
  if (graph.n_nodes < 1) fail(ErrorCode::kUndefined, "entropy of an empty graph is undefined");
  const auto edges = edge_set(graph);
  const int n = graph.n_nodes;
  std::vector<double> din(n, 0.0), dout(n, 0.0);
  for (const auto& [u, v] : edges) {
    dout[u] += 1.0;
    din[v] += 1.0;
  }
  double sum = 0.0;
  for (const auto& [u, v] : edges) {
    if (din[u] > 0.0) sum += din[u] / (din[v] * dout[u] * dout[u]);
    if (edges.count({v, u})) sum += 1.0 / (dout[u] * dout[v]);
  }
  const double nn = static_cast<double>(n);
  return 1.0 - 1.0 / nn - sum / (2.0 * nn * nn);
}

std::pair<double, double> entropy_bounds(int n) {
  if (n < 2) fail(ErrorCode::kInvalidArgument, "entropy bounds need n >= 2");
  // Written as ratios so that e.g. n = 10 gives exactly 0.85 and 0.9.
  const double nn = static_cast<double>(n);
  return {(nn - 1.5) / nn, (nn - 1.0) / nn};
}

double entropy_delta(const phylogeny::PhylogenyTree& truth, const phylogeny::PhylogenyTree& recon) {
  if (truth.n != recon.n) fail(ErrorCode::kInvalidArgument, "trees have different node counts");
  return von_neumann_entropy(as_digraph(recon)) - von_neumann_entropy(as_digraph(truth));
}

EvalReport evaluate(const std::vector<int>& candidates,
                    const std::vector<phylogeny::PhylogenyTree>& trees,
                    const phylogeny::PhylogenyTree& truth) {
  if (candidates.empty() || candidates.size() != trees.size())
    fail(ErrorCode::kInvalidArgument, "need one tree per root candidate");
  EvalReport r;
  const int kmax = static_cast<int>(candidates.size());
  for (int k = 1; k <= 3; ++k) r.root_rank_hits[k - 1] = root_rank_hit(candidates, truth.root, std::min(k, kmax));
  const auto it = std::find(candidates.begin(), candidates.end(), truth.root);
  const auto& tree = trees[it == candidates.end() ? 0 : it - candidates.begin()];
  r.ipt_accuracy = ipt_accuracy(tree, truth);
  r.entropy_truth = von_neumann_entropy(as_digraph(truth));
  r.entropy_recon = von_neumann_entropy(as_digraph(tree));
  r.entropy_delta = r.entropy_recon - r.entropy_truth;
  return r;
}

Aggregate aggregate(const std::vector<EvalReport>& reports) {
  if (reports.empty()) fail(ErrorCode::kInsufficientData, "no trials to aggregate");
  Aggregate a;
  a.n_trials = reports.size();
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    for (int k = 0; k < 3; ++k) a.rank_rates[k] += r.root_rank_hits[k] ? 1.0 : 0.0;
    a.mean_ipt_accuracy += r.ipt_accuracy;
    a.entropy_delta_mean += r.entropy_delta;
  }
  for (double& v : a.rank_rates) v /= n;
  a.mean_ipt_accuracy /= n;
  a.entropy_delta_mean /= n;
  double ss = 0.0;
  for (const auto& r : reports) ss += (r.entropy_delta - a.entropy_delta_mean) * (r.entropy_delta - a.entropy_delta_mean);
  a.entropy_delta_stddev = std::sqrt(ss / n);
  return a;
}

}  // namespace phylokit::evalmetrics
